use super::{Simplex, SimplicialComplex3};
use crate::error::Result;

/// Parent bookkeeping between a complex and its barycentric subdivision.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    /// Coarse simplex whose barycenter each fine vertex is.
    pub vertex_parent: Vec<Simplex>,
    /// Smallest coarse simplex carrying each fine face (a coarse face or tet).
    pub face_carrier: Vec<Simplex>,
    pub tet_parent: Vec<usize>,
    /// The six fine faces lying in each coarse face, sorted.
    pub sub_faces: Vec<[usize; 6]>,
}

/// Barycentric subdivision. Fine vertices are ordered by decreasing dimension
/// of their parent simplex (tets, faces, edges, vertices), ties by parent id.
pub fn barycentric_subdivision(k: &SimplicialComplex3) -> Result<(SimplicialComplex3, SubdivisionMap)> {
    let (nt, nf, ne, nv) = (k.num_tets(), k.num_faces(), k.num_edges(), k.num_vertices());
    let (of, oe, ov) = (nt, nt + nf, nt + nf + ne);

    let mut vertex_parent = Vec::with_capacity(nt + nf + ne + nv);
    let mut points = Vec::with_capacity(vertex_parent.capacity());
    for (dim, n) in [(3u8, nt), (2, nf), (1, ne), (0, nv)] {
        for id in 0..n {
            let s = Simplex { dim, id };
            let b = k.barycenter(s);
            vertex_parent.push(s);
            points.push([b.x, b.y, b.z]);
        }
    }

    let mut tets = Vec::with_capacity(24 * nt);
    let mut tet_parent = Vec::with_capacity(24 * nt);
    for t in 0..nt {
        for &f in k.tet_faces(t) {
            for &e in k.face_edges(f) {
                for &p in &k.edges()[e] {
                    tets.push([t, of + f, oe + e, ov + p]);
                    tet_parent.push(t);
                }
            }
        }
    }
    let fine = SimplicialComplex3::from_tets(points, &tets)?;

    let mut face_carrier = Vec::with_capacity(fine.num_faces());
    let mut sub: Vec<Vec<usize>> = vec![Vec::with_capacity(6); nf];
    for (g, fv) in fine.faces().iter().enumerate() {
        // The lowest id belongs to the highest-dimensional parent.
        let c = vertex_parent[fv[0]];
        if c.dim == 2 {
            sub[c.id].push(g);
        }
        face_carrier.push(c);
    }
    let sub_faces = sub
        .into_iter()
        .map(|v| <[usize; 6]>::try_from(v).expect("six sub-faces per coarse face"))
        .collect();

    Ok((fine, SubdivisionMap { vertex_parent, face_carrier, tet_parent, sub_faces }))
}
