use super::SimplicialComplex3;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshFile {
    /// Coordinates in metres.
    pub vertices: Vec<[f64; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub boundary_faces: Vec<[usize; 3]>,
}

impl From<&SimplicialComplex3> for MeshFile {
    fn from(k: &SimplicialComplex3) -> Self {
        Self {
            vertices: k.vertices().to_vec(),
            tets: k.tets().to_vec(),
            boundary_faces: k.boundary_face_ids().into_iter().map(|f| k.faces()[f]).collect(),
        }
    }
}

impl MeshFile {
    pub fn to_complex(&self) -> Result<SimplicialComplex3> {
        SimplicialComplex3::from_tets(self.vertices.clone(), &self.tets)
    }
}

pub fn write_mesh(k: &SimplicialComplex3, path: &Path) -> Result<()> {
    let s = serde_json::to_string(&MeshFile::from(k))?;
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<SimplicialComplex3> {
    let m: MeshFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    m.to_complex()
}
