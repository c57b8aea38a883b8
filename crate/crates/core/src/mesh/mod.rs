//! Tetrahedral complexes, block-generated bodies and barycentric subdivision.

mod body;
mod build;
mod complex;
mod io;
mod subdivision;

pub use body::{Body, BoundaryFrame, ObservationPoint, PointKind};
pub use build::{build_heightfield_plate, build_slab, HeightField};
pub use complex::{Census, Classification, Simplex, SimplicialComplex3};
pub use io::{read_mesh, write_mesh, MeshFile};
pub use subdivision::{barycentric_subdivision, SubdivisionMap};
