//! Whitney face-field discretization of small vibrations of thin orthotropic
//! plates: meshing, assembly, constrained eigenanalysis, forced resonance and
//! Chladni nodal-pattern extraction.

pub mod assembly;
pub mod error;
pub mod material;
pub mod mesh;
pub mod solver;
pub mod sparse;
pub mod vibration;
pub mod whitney;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[inline]
pub(crate) fn v3(p: [f64; 3]) -> Vec3 {
    Vec3::new(p[0], p[1], p[2])
}
