//! Sparse mass and stiffness matrices over the face fields of the fine
//! complex, the traction boundary constraints, and forcing vectors.
//!
//! Matrices are indexed by global fine-face id; interior/boundary blocks are
//! addressed through index lists rather than by permuting storage.

mod constraints;
mod forcing;

pub use constraints::{assemble_boundary_constraints, ConstraintMap, FaceSubsystem, RANK_TOL};
pub use forcing::{assemble_forcing, write_forcing_csv, ForcingWave, WaveSign};

use crate::material::ElasticTensor;
use crate::mesh::Body;
use crate::sparse::CsrMatrix;
use crate::whitney::WhitneyBasis;
use crate::Vec3;
use rayon::prelude::*;

fn scatter(n: usize, locals: Vec<([usize; 4], [[f64; 4]; 4])>, extra: Vec<(usize, f64)>) -> CsrMatrix {
    let mut t = Vec::with_capacity(16 * locals.len() + extra.len());
    for (faces, m) in locals {
        for i in 0..4 {
            for j in 0..4 {
                t.push((faces[i], faces[j], m[i][j]));
            }
        }
    }
    t.extend(extra.into_iter().map(|(f, v)| (f, f, v)));
    CsrMatrix::from_triplets(n, n, t)
}

/// `ρ ∫ W_f · W_g`.
pub fn assemble_mass(basis: &WhitneyBasis, rho: f64) -> CsrMatrix {
    let k = basis.complex();
    let locals = (0..k.num_tets())
        .into_par_iter()
        .map(|t| {
            let mut m = basis.local_mass(t);
            m.iter_mut().flatten().for_each(|v| *v *= rho);
            (*k.tet_faces(t), m)
        })
        .collect();
    scatter(k.num_faces(), locals, Vec::new())
}

/// Volume part `−∫ ∂_i W_f^α A^{αβ}_{ij} ∂_j W_g^β` plus the boundary term on
/// the diagonal of boundary faces.
pub fn assemble_stiffness(body: &Body, basis: &WhitneyBasis, tensor: &ElasticTensor) -> CsrMatrix {
    let k = basis.complex();
    let locals = (0..k.num_tets())
        .into_par_iter()
        .map(|t| {
            let g: [_; 4] = std::array::from_fn(|i| basis.face_gradient(t, i));
            let vol = basis.volume(t);
            let mut m = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in i..4 {
                    let v = -vol * tensor.pair(&g[i], &g[j]);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            (*k.tet_faces(t), m)
        })
        .collect();
    let boundary: Vec<usize> = k.boundary_face_ids();
    let extra = boundary.par_iter().map(|&f| (f, boundary_term(body, basis, tensor, f))).collect();
    scatter(k.num_faces(), locals, extra)
}

/// `B(W_f, W_f) = ⟨σ(DW)N, W⟩ − (⟨σ(DW)N, N⟩ + ⟨W'(1)N, N⟩⟨∂_N W, N⟩)⟨W, N⟩`
/// integrated over the boundary face `f`.
pub fn boundary_term(body: &Body, basis: &WhitneyBasis, tensor: &ElasticTensor, f: usize) -> f64 {
    let k = basis.complex();
    let t = k.face_star(f)[0];
    let i = k.local_face(f, t).expect("incident");
    let n: Vec3 = body.frame_of_fine_face(f).map_or_else(|| k.outward_normal(f), |fr| fr.normal);
    let g = basis.face_gradient(t, i);
    let (wp, sn) = tensor.boundary_products(&n, &g);
    let int_w = basis.face_integral_on(t, i, i);
    let dn = (g * n).dot(&n);
    sn.dot(&int_w) - (sn.dot(&n) + wp.dot(&n) * dn) * int_w.dot(&n)
}

/// Off-diagonal entries coupling two distinct boundary faces, structural and
/// numerically nonzero respectively. Both should be zero.
pub fn boundary_block_violations(m: &CsrMatrix, is_boundary: impl Fn(usize) -> bool) -> (usize, usize) {
    let mut structural = 0;
    let mut numeric = 0;
    for (i, j, v) in m.triplets() {
        if i != j && is_boundary(i) && is_boundary(j) {
            structural += 1;
            if v != 0.0 {
                numeric += 1;
            }
        }
    }
    (structural, numeric)
}

/// `(Pᵀ I P, Pᵀ K P)` with the constraint prolongation `P`.
pub fn reduce_system(mass: &CsrMatrix, stiffness: &CsrMatrix, cmap: &ConstraintMap) -> (CsrMatrix, CsrMatrix) {
    let p = cmap.prolongation();
    (mass.congruence(&p), stiffness.congruence(&p))
}

/// Largest number of off-diagonal nonzeros per row within the lower-right
/// (free boundary) block of a reduced matrix.
pub fn lower_right_offdiag_max(m: &CsrMatrix, n_interior: usize) -> usize {
    (n_interior..m.nrows())
        .map(|i| m.row(i).filter(|&(j, v)| j >= n_interior && j != i && v != 0.0).count())
        .max()
        .unwrap_or(0)
}
