use super::{barycentric_subdivision, SimplicialComplex3, SubdivisionMap};
use crate::error::{Error, Result};
use crate::Vec3;
use std::collections::BTreeSet;

/// Oriented orthonormal frame on a coarse boundary face.
#[derive(Clone, Debug)]
pub struct BoundaryFrame {
    pub coarse_face: usize,
    pub normal: Vec3,
    pub t1: Vec3,
    pub t2: Vec3,
    /// The six fine faces subdividing the coarse face.
    pub sub_faces: [usize; 6],
}

/// A meshed body: the coarse complex, its subdivision, and boundary frames.
#[derive(Clone, Debug)]
pub struct Body {
    pub name: String,
    pub coarse: SimplicialComplex3,
    pub fine: SimplicialComplex3,
    pub map: SubdivisionMap,
    pub frames: Vec<BoundaryFrame>,
    /// Frame index of every fine boundary face.
    fine_frame: Vec<Option<usize>>,
}

impl Body {
    pub fn new(name: impl Into<String>, coarse: SimplicialComplex3) -> Result<Self> {
        let (fine, map) = barycentric_subdivision(&coarse)?;
        let mut frames = Vec::new();
        let mut fine_frame = vec![None; fine.num_faces()];
        for f in coarse.boundary_face_ids() {
            let normal = coarse.outward_normal(f);
            let [a, b, _] = coarse.face_points(f);
            let t1 = (b - a).normalize();
            let t2 = normal.cross(&t1);
            for &g in &map.sub_faces[f] {
                fine_frame[g] = Some(frames.len());
            }
            frames.push(BoundaryFrame { coarse_face: f, normal, t1, t2, sub_faces: map.sub_faces[f] });
        }
        Ok(Self { name: name.into(), coarse, fine, map, frames, fine_frame })
    }

    pub fn frame_of_fine_face(&self, g: usize) -> Option<&BoundaryFrame> {
        self.fine_frame[g].map(|i| &self.frames[i])
    }

    /// Coarse boundary faces whose outward normal is within the cone
    /// `N·direction ≥ min_cos`.
    pub fn select_side(&self, direction: Vec3, min_cos: f64) -> Vec<usize> {
        let d = direction.normalize();
        self.frames
            .iter()
            .filter(|fr| fr.normal.dot(&d) >= min_cos)
            .map(|fr| fr.coarse_face)
            .collect()
    }

    /// Unique sub-face vertices followed by sub-face barycenters over the
    /// selected coarse faces. Each point carries a fine tet that contains it.
    pub fn observation_points(&self, coarse_faces: &[usize]) -> Result<Vec<ObservationPoint>> {
        if coarse_faces.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut verts = BTreeSet::new();
        let mut subs = Vec::new();
        for &f in coarse_faces {
            if f >= self.coarse.num_faces() || !self.coarse.is_boundary_face(f) {
                return Err(Error::UnknownId { kind: "boundary face", id: f });
            }
            for &g in &self.map.sub_faces[f] {
                verts.extend(self.fine.faces()[g]);
                subs.push(g);
            }
        }
        subs.sort_unstable();
        let mut out = Vec::with_capacity(verts.len() + subs.len());
        for p in verts {
            let tets: Vec<usize> = self
                .fine
                .vertex_star(p)
                .into_iter()
                .filter(|&t| {
                    // patch tets: those owning one of the selected sub-faces
                    self.fine.tet_faces(t).iter().any(|&g| {
                        self.fine.is_boundary_face(g)
                            && self.fine.faces()[g].contains(&p)
                            && subs.binary_search(&g).is_ok()
                    })
                })
                .collect();
            out.push(ObservationPoint { x: self.fine.vertex(p), tets, kind: PointKind::Vertex(p) });
        }
        for g in subs {
            out.push(ObservationPoint {
                x: self.fine.barycenter(super::Simplex::face(g)),
                tets: self.fine.face_star(g).to_vec(),
                kind: PointKind::Barycenter(g),
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Vertex(usize),
    Barycenter(usize),
}

/// A point on the boundary with the fine tets used to evaluate fields there;
/// values at shared vertices are averaged over these tets.
#[derive(Clone, Debug)]
pub struct ObservationPoint {
    pub x: Vec3,
    pub tets: Vec<usize>,
    pub kind: PointKind,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_slab;

    #[test]
    fn frames_are_orthonormal_and_outward() {
        let body = Body::new("s", build_slab(2, 1, 2, 0.01, 0.005, 0.01).unwrap()).unwrap();
        let (lo, hi) = body.coarse.bounds();
        let mid = (lo + hi) / 2.0;
        for fr in &body.frames {
            assert!((fr.normal.norm() - 1.0).abs() < 1e-12);
            assert!((fr.t1.norm() - 1.0).abs() < 1e-12);
            assert!((fr.t2.norm() - 1.0).abs() < 1e-12);
            assert!(fr.normal.dot(&fr.t1).abs() < 1e-12);
            assert!(fr.t1.cross(&fr.t2).dot(&fr.normal) > 1.0 - 1e-12);
            let c = body.coarse.barycenter(crate::mesh::Simplex::face(fr.coarse_face));
            assert!(fr.normal.dot(&(c - mid)) > 0.0);
        }
    }

    #[test]
    fn single_face_observation_census() {
        let body = Body::new("s", build_slab(1, 1, 1, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let f = body.frames[0].coarse_face;
        let pts = body.observation_points(&[f]).unwrap();
        assert_eq!(pts.len(), 13);
        assert!(matches!(body.observation_points(&[]), Err(Error::EmptySelection)));
    }

    #[test]
    fn observation_tets_contain_points() {
        let body = Body::new("s", build_slab(2, 1, 2, 0.01, 0.005, 0.01).unwrap()).unwrap();
        let top = body.select_side(Vec3::y(), 0.999);
        assert_eq!(top.len(), 8);
        for p in body.observation_points(&top).unwrap() {
            assert!(!p.tets.is_empty());
            for &t in &p.tets {
                assert!(body.fine.contains(t, &p.x));
            }
        }
    }
}
