use crate::error::{Error, Result};
use crate::{v3, Vec3};

const NONE: usize = usize::MAX;

/// A simplex addressed by dimension and id within that dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Simplex {
    pub dim: u8,
    pub id: usize,
}

impl Simplex {
    pub fn vertex(id: usize) -> Self {
        Self { dim: 0, id }
    }
    pub fn edge(id: usize) -> Self {
        Self { dim: 1, id }
    }
    pub fn face(id: usize) -> Self {
        Self { dim: 2, id }
    }
    pub fn tet(id: usize) -> Self {
        Self { dim: 3, id }
    }
}

/// Compressed adjacency lists.
#[derive(Clone, Debug, Default)]
struct Csr {
    offsets: Vec<usize>,
    data: Vec<usize>,
}

impl Csr {
    fn build(n: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for (r, _) in pairs.clone() {
            offsets[r + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut data = vec![0usize; offsets[n]];
        for (r, c) in pairs {
            data[fill[r]] = c;
            fill[r] += 1;
        }
        Self { offsets, data }
    }

    fn row(&self, r: usize) -> &[usize] {
        &self.data[self.offsets[r]..self.offsets[r + 1]]
    }
}

/// Oriented tetrahedral complex.
///
/// Every simplex is stored with strictly increasing vertex ids. A tetrahedron
/// additionally carries the sign of its volume in that order, so that the
/// incidence numbers absorb the mismatch between the vertex order and the
/// ambient orientation.
#[derive(Clone, Debug)]
pub struct SimplicialComplex3 {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
    tet_sign: Vec<i8>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    // face opposite local vertex i
    tet_faces: Vec<[usize; 4]>,
    // edge opposite local vertex i
    face_edges: Vec<[usize; 3]>,
    face_tets: Vec<[usize; 2]>,
    edge_faces: Csr,
    vertex_edges: Csr,
    boundary_faces: Vec<bool>,
    boundary_edges: Vec<bool>,
    boundary_vertices: Vec<bool>,
}

pub(crate) fn signed_volume(p: &[[f64; 3]; 4]) -> f64 {
    let a = v3(p[1]) - v3(p[0]);
    let b = v3(p[2]) - v3(p[0]);
    let c = v3(p[3]) - v3(p[0]);
    a.dot(&b.cross(&c)) / 6.0
}

fn drop_index<const N: usize, const M: usize>(s: &[usize; N], i: usize) -> [usize; M] {
    let mut out = [0usize; M];
    let mut k = 0;
    for (j, &v) in s.iter().enumerate() {
        if j != i {
            out[k] = v;
            k += 1;
        }
    }
    out
}

impl SimplicialComplex3 {
    /// Builds the complex generated by `tets`, deriving faces, edges,
    /// incidences and boundary flags.
    pub fn from_tets(vertices: Vec<[f64; 3]>, tets: &[[usize; 4]]) -> Result<Self> {
        let nv = vertices.len();
        let mut sorted_tets = Vec::with_capacity(tets.len());
        let mut tet_sign = Vec::with_capacity(tets.len());
        for (ti, t) in tets.iter().enumerate() {
            for &v in t {
                if v >= nv {
                    return Err(Error::UnknownId { kind: "vertex", id: v });
                }
            }
            let mut s = *t;
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegenerateTet { tet: ti, volume: 0.0 });
            }
            let p = s.map(|v| vertices[v]);
            let vol = signed_volume(&p);
            let h = (1..4)
                .map(|k| (v3(p[k]) - v3(p[0])).norm())
                .fold(0.0f64, f64::max);
            if !(vol.abs() > 1e-12 * h * h * h) {
                return Err(Error::DegenerateTet { tet: ti, volume: vol });
            }
            sorted_tets.push(s);
            tet_sign.push(if vol > 0.0 { 1 } else { -1 });
        }

        let mut faces: Vec<[usize; 3]> = sorted_tets
            .iter()
            .flat_map(|t| (0..4).map(move |i| drop_index::<4, 3>(t, i)))
            .collect();
        faces.sort_unstable();
        faces.dedup();
        let mut edges: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|f| (0..3).map(move |i| drop_index::<3, 2>(f, i)))
            .collect();
        edges.sort_unstable();
        edges.dedup();

        let find_face = |f: &[usize; 3]| faces.binary_search(f).expect("face present");
        let find_edge = |e: &[usize; 2]| edges.binary_search(e).expect("edge present");

        let tet_faces: Vec<[usize; 4]> = sorted_tets
            .iter()
            .map(|t| std::array::from_fn(|i| find_face(&drop_index::<4, 3>(t, i))))
            .collect();
        let face_edges: Vec<[usize; 3]> = faces
            .iter()
            .map(|f| std::array::from_fn(|i| find_edge(&drop_index::<3, 2>(f, i))))
            .collect();

        let mut face_tets = vec![[NONE; 2]; faces.len()];
        for (t, tf) in tet_faces.iter().enumerate() {
            for &f in tf {
                let slot = &mut face_tets[f];
                if slot[0] == NONE {
                    slot[0] = t;
                } else if slot[1] == NONE {
                    slot[1] = t;
                } else {
                    return Err(Error::NonManifold { face: f, count: 3 });
                }
            }
        }

        let edge_faces = Csr::build(
            edges.len(),
            face_edges
                .iter()
                .enumerate()
                .flat_map(|(f, fe)| fe.iter().map(move |&e| (e, f))),
        );
        let vertex_edges = Csr::build(
            nv,
            edges
                .iter()
                .enumerate()
                .flat_map(|(e, ev)| ev.iter().map(move |&p| (p, e))),
        );

        let boundary_faces: Vec<bool> = face_tets.iter().map(|s| s[1] == NONE).collect();
        let mut boundary_edges = vec![false; edges.len()];
        let mut boundary_vertices = vec![false; nv];
        for (f, &b) in boundary_faces.iter().enumerate() {
            if b {
                for &e in &face_edges[f] {
                    boundary_edges[e] = true;
                }
                for &p in &faces[f] {
                    boundary_vertices[p] = true;
                }
            }
        }

        let k = Self {
            vertices,
            tets: sorted_tets,
            tet_sign,
            faces,
            edges,
            tet_faces,
            face_edges,
            face_tets,
            edge_faces,
            vertex_edges,
            boundary_faces,
            boundary_edges,
            boundary_vertices,
        };
        for f in 0..k.faces.len() {
            if let [t0, t1] = *k.face_star(f) {
                if k.b_ft(f, t0) != -k.b_ft(f, t1) {
                    return Err(Error::InconsistentOrientation { face: f });
                }
            }
        }
        Ok(k)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
            - self.num_tets() as i64
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }
    pub fn vertex(&self, p: usize) -> Vec3 {
        v3(self.vertices[p])
    }
    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Faces of `t`; entry `i` is the face opposite local vertex `i`.
    pub fn tet_faces(&self, t: usize) -> &[usize; 4] {
        &self.tet_faces[t]
    }
    /// Edges of `f`; entry `i` is the edge opposite local vertex `i`.
    pub fn face_edges(&self, f: usize) -> &[usize; 3] {
        &self.face_edges[f]
    }

    /// +1 when the sorted vertex order of `t` is positively oriented.
    pub fn tet_sign(&self, t: usize) -> i8 {
        self.tet_sign[t]
    }

    pub fn tet_points(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|p| self.vertex(p))
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        signed_volume(&self.tets[t].map(|p| self.vertices[p])).abs()
    }

    pub fn face_points(&self, f: usize) -> [Vec3; 3] {
        self.faces[f].map(|p| self.vertex(p))
    }

    /// Right-hand normal of the face's vertex order, scaled by twice its area.
    pub fn face_normal_raw(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_normal_raw(f).norm()
    }

    pub fn barycenter(&self, s: Simplex) -> Vec3 {
        let ids: &[usize] = match s.dim {
            0 => std::slice::from_ref(&s.id),
            1 => &self.edges[s.id],
            2 => &self.faces[s.id],
            _ => &self.tets[s.id],
        };
        ids.iter().map(|&p| self.vertex(p)).sum::<Vec3>() / ids.len() as f64
    }

    /// Local index of face `f` within tet `t`, if incident.
    pub fn local_face(&self, f: usize, t: usize) -> Option<usize> {
        self.tet_faces[t].iter().position(|&g| g == f)
    }

    /// Tetrahedra containing face `f`: one for boundary faces, two otherwise.
    pub fn face_star(&self, f: usize) -> &[usize] {
        let s = &self.face_tets[f];
        if s[1] == NONE {
            &s[..1]
        } else {
            &s[..]
        }
    }

    pub fn edge_faces(&self, e: usize) -> &[usize] {
        self.edge_faces.row(e)
    }

    pub fn vertex_edges(&self, p: usize) -> &[usize] {
        self.vertex_edges.row(p)
    }

    /// Tetrahedra containing edge `e`, sorted.
    pub fn edge_star(&self, e: usize) -> Vec<usize> {
        let mut ts: Vec<usize> = self
            .edge_faces(e)
            .iter()
            .flat_map(|&f| self.face_star(f).iter().copied())
            .collect();
        ts.sort_unstable();
        ts.dedup();
        ts
    }

    /// Tetrahedra containing vertex `p`, sorted.
    pub fn vertex_star(&self, p: usize) -> Vec<usize> {
        let mut ts: Vec<usize> = self
            .vertex_edges(p)
            .iter()
            .flat_map(|&e| self.edge_star(e))
            .collect();
        ts.sort_unstable();
        ts.dedup();
        ts
    }

    pub fn star(&self, s: Simplex) -> Result<Vec<usize>> {
        self.check(s)?;
        Ok(match s.dim {
            0 => self.vertex_star(s.id),
            1 => self.edge_star(s.id),
            2 => self.face_star(s.id).to_vec(),
            _ => vec![s.id],
        })
    }

    fn check(&self, s: Simplex) -> Result<()> {
        let (n, kind) = match s.dim {
            0 => (self.num_vertices(), "vertex"),
            1 => (self.num_edges(), "edge"),
            2 => (self.num_faces(), "face"),
            3 => (self.num_tets(), "tet"),
            _ => return Err(Error::InvalidInput(format!("simplex dimension {}", s.dim))),
        };
        if s.id >= n {
            return Err(Error::UnknownId { kind, id: s.id });
        }
        Ok(())
    }

    /// b_pe: −1 if e = [p, q], +1 if e = [q, p], 0 otherwise.
    pub fn b_pe(&self, p: usize, e: usize) -> i8 {
        let [a, b] = self.edges[e];
        if p == a {
            -1
        } else if p == b {
            1
        } else {
            0
        }
    }

    /// b_ef: (−1)^i where i is the local index of the vertex of f missing from e.
    pub fn b_ef(&self, e: usize, f: usize) -> i8 {
        match self.face_edges[f].iter().position(|&g| g == e) {
            Some(i) => sign_of(i),
            None => 0,
        }
    }

    /// b_ft: +1 when the right-hand normal of f points out of t.
    pub fn b_ft(&self, f: usize, t: usize) -> i8 {
        match self.local_face(f, t) {
            Some(i) => self.tet_face_sign(t, i),
            None => 0,
        }
    }

    /// Incidence sign of the local face `i` of `t`.
    #[inline]
    pub fn tet_face_sign(&self, t: usize, i: usize) -> i8 {
        self.tet_sign[t] * sign_of(i)
    }

    pub fn incidence(&self, a: Simplex, b: Simplex) -> Result<i8> {
        if b.dim != a.dim + 1 {
            return Err(Error::DimensionMismatch { a: a.dim, b: b.dim });
        }
        self.check(a)?;
        self.check(b)?;
        Ok(match a.dim {
            0 => self.b_pe(a.id, b.id),
            1 => self.b_ef(a.id, b.id),
            _ => self.b_ft(a.id, b.id),
        })
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.boundary_faces[f]
    }
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edges[e]
    }
    pub fn is_boundary_vertex(&self, p: usize) -> bool {
        self.boundary_vertices[p]
    }

    pub fn boundary_face_ids(&self) -> Vec<usize> {
        (0..self.num_faces()).filter(|&f| self.boundary_faces[f]).collect()
    }

    /// Outward unit normal of a boundary face.
    pub fn outward_normal(&self, f: usize) -> Vec3 {
        let t = self.face_star(f)[0];
        let n = self.face_normal_raw(f).normalize();
        n * f64::from(self.b_ft(f, t))
    }

    /// Barycentric coordinates of `x` in tet `t` (local vertex order).
    pub fn barycentric(&self, t: usize, x: &Vec3) -> [f64; 4] {
        let [p0, p1, p2, p3] = self.tet_points(t);
        let m = crate::Mat3::from_columns(&[p1 - p0, p2 - p0, p3 - p0]);
        let l = m.try_inverse().expect("non-degenerate tet") * (x - p0);
        [1.0 - l.x - l.y - l.z, l.x, l.y, l.z]
    }

    /// A tetrahedron containing `x` (with a small relative tolerance), if any.
    pub fn locate(&self, x: &Vec3) -> Option<usize> {
        (0..self.num_tets()).find(|&t| self.contains(t, x))
    }

    pub fn contains(&self, t: usize, x: &Vec3) -> bool {
        self.barycentric(t, x).iter().all(|&l| l >= -1e-10)
    }

    /// Interior/boundary partition of edges and faces using the vertex test:
    /// a simplex is interior when at least one of its vertices is interior.
    pub fn classify(&self) -> Classification {
        let interior = |ids: &[usize]| ids.iter().any(|&p| !self.boundary_vertices[p]);
        let mut c = Classification::default();
        for (f, fv) in self.faces.iter().enumerate() {
            if interior(fv) {
                c.interior_faces.push(f);
            } else {
                c.boundary_faces.push(f);
            }
        }
        for (e, ev) in self.edges.iter().enumerate() {
            if interior(ev) {
                c.interior_edges.push(e);
            } else {
                c.boundary_edges.push(e);
            }
        }
        c
    }

    pub fn census(&self) -> Census {
        Census {
            vertices: self.num_vertices(),
            edges: self.num_edges(),
            faces: self.num_faces(),
            tets: self.num_tets(),
            boundary_faces: self.boundary_faces.iter().filter(|&&b| b).count(),
            boundary_edges: self.boundary_edges.iter().filter(|&&b| b).count(),
            boundary_vertices: self.boundary_vertices.iter().filter(|&&b| b).count(),
            euler: self.euler_characteristic(),
        }
    }

    /// Total area of the boundary surface.
    pub fn boundary_area(&self) -> f64 {
        (0..self.num_faces())
            .filter(|&f| self.boundary_faces[f])
            .map(|f| self.face_area(f))
            .sum()
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.vertices {
            let p = v3(*p);
            lo = lo.inf(&p);
            hi = hi.sup(&p);
        }
        (lo, hi)
    }
}

#[inline]
fn sign_of(i: usize) -> i8 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Classification {
    pub interior_faces: Vec<usize>,
    pub boundary_faces: Vec<usize>,
    pub interior_edges: Vec<usize>,
    pub boundary_edges: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Census {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub tets: usize,
    pub boundary_faces: usize,
    pub boundary_edges: usize,
    pub boundary_vertices: usize,
    pub euler: i64,
}

impl std::fmt::Display for Census {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "V={} E={} F={} T={} boundary(F={} E={} V={}) chi={}",
            self.vertices,
            self.edges,
            self.faces,
            self.tets,
            self.boundary_faces,
            self.boundary_edges,
            self.boundary_vertices,
            self.euler
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tet() -> SimplicialComplex3 {
        SimplicialComplex3::from_tets(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
            &[[0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_tet_counts() {
        let k = unit_tet();
        assert_eq!((k.num_vertices(), k.num_edges(), k.num_faces(), k.num_tets()), (4, 6, 4, 1));
        assert_eq!(k.euler_characteristic(), 1);
        assert!((0..4).all(|f| k.is_boundary_face(f)));
    }

    #[test]
    fn edge_incidence_convention() {
        let k = unit_tet();
        let e = k.edges().iter().position(|e| *e == [0, 1]).unwrap();
        assert_eq!(k.b_pe(0, e), -1);
        assert_eq!(k.b_pe(1, e), 1);
        assert_eq!(k.b_pe(2, e), 0);
        assert!(matches!(
            k.incidence(Simplex::vertex(0), Simplex::face(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn outward_normals_point_away_from_centroid() {
        let k = unit_tet();
        let c = k.barycenter(Simplex::tet(0));
        for f in 0..4 {
            let n = k.outward_normal(f);
            assert!(n.dot(&(k.barycenter(Simplex::face(f)) - c)) > 0.0);
        }
    }

    #[test]
    fn reversed_input_order_gives_same_incidences() {
        let k = SimplicialComplex3::from_tets(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
            &[[1, 0, 2, 3]],
        )
        .unwrap();
        let j = unit_tet();
        for f in 0..4 {
            assert_eq!(k.b_ft(f, 0), j.b_ft(f, 0));
        }
    }

    #[test]
    fn composite_incidence_vanishes() {
        let k = unit_tet();
        for p in 0..4 {
            for f in 0..4 {
                let s: i32 = (0..6).map(|e| i32::from(k.b_pe(p, e) * k.b_ef(e, f))).sum();
                assert_eq!(s, 0);
            }
        }
        for e in 0..6 {
            let s: i32 = (0..4).map(|f| i32::from(k.b_ef(e, f) * k.b_ft(f, 0))).sum();
            assert_eq!(s, 0);
        }
    }

    #[test]
    fn degenerate_tet_rejected() {
        let r = SimplicialComplex3::from_tets(
            vec![[0., 0., 0.], [1., 0., 0.], [2., 0., 0.], [0., 0., 1.]],
            &[[0, 1, 2, 3]],
        );
        assert!(matches!(r, Err(Error::DegenerateTet { .. })));
    }

    #[test]
    fn overlapping_tets_rejected() {
        let r = SimplicialComplex3::from_tets(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.], [0.1, 0.1, 0.1]],
            &[[0, 1, 2, 3], [0, 1, 2, 4]],
        );
        assert!(matches!(r, Err(Error::InconsistentOrientation { .. })));
    }
}
