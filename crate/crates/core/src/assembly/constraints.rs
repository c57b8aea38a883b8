use crate::error::{Error, Result};
use crate::material::ElasticTensor;
use crate::mesh::Body;
use crate::sparse::CsrMatrix;
use crate::whitney::WhitneyBasis;
use crate::Mat3;
use rayon::prelude::*;

/// Singular values below `RANK_TOL` times the natural magnitude of the
/// entries (area × tensor × field-gradient scale) count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// The two traction equations over the six sub-faces of one coarse boundary face.
#[derive(Clone, Debug)]
pub struct FaceSubsystem {
    pub coarse_face: usize,
    pub sub_faces: [usize; 6],
    pub rows: [[f64; 6]; 2],
    /// Magnitude the entries would have without cancellation.
    pub scale: f64,
    pub singular_values: [f64; 2],
    pub rank: u8,
    /// Sub-face positions solved for (the pivots), in pivot order.
    pub pivots: Vec<usize>,
}

/// Partition of the fine faces into interior, dependent boundary (∂ᴵ) and
/// free boundary (∂ᴮ) sets, with `c_dependent = C c_free`.
#[derive(Clone, Debug)]
pub struct ConstraintMap {
    pub n_faces: usize,
    pub interior: Vec<usize>,
    pub dependent: Vec<usize>,
    pub free: Vec<usize>,
    /// `|dependent| × |free|`.
    pub c: CsrMatrix,
    pub subsystems: Vec<FaceSubsystem>,
    /// Number of null rows among the `2|F_∂|` equations.
    pub r_n: usize,
}

fn subsystem(body: &Body, basis: &WhitneyBasis, tensor: &ElasticTensor, frame: usize) -> FaceSubsystem {
    let fr = &body.frames[frame];
    let k = basis.complex();
    let wp = tensor.w_prime_n(&fr.normal);
    let mut rows = [[0.0; 6]; 2];
    let mut scale = 0.0f64;
    for (j, &g) in fr.sub_faces.iter().enumerate() {
        let t = k.face_star(g)[0];
        let grad: Mat3 = basis.face_gradient(t, k.local_face(g, t).expect("incident"));
        let sn = tensor.sigma_n(&grad, &fr.normal);
        let area = k.face_area(g);
        // integrands are constant on the sub-face
        for (r, tk) in [fr.t1, fr.t2].iter().enumerate() {
            rows[r][j] = area * ((grad * tk).dot(&wp) + tk.dot(&sn));
        }
        scale = scale.max(area * (grad.norm() * wp.norm() + tensor.stress(&grad).norm()));
    }
    let singular_values = singular_values(&rows);
    let tol = RANK_TOL * scale;
    let rank = singular_values.iter().filter(|&&s| s > tol).count() as u8;
    let pivots = choose_pivots(&rows, rank);
    FaceSubsystem { coarse_face: fr.coarse_face, sub_faces: fr.sub_faces, rows, scale, singular_values, rank, pivots }
}

/// Singular values of a 2×6 matrix. `σ₁σ₂` is taken from the 2×2 minors
/// rather than from the Gram matrix, which would only resolve `σ₂` down to
/// about `√ε σ₁`.
fn singular_values(rows: &[[f64; 6]; 2]) -> [f64; 2] {
    let (a, b) = (&rows[0], &rows[1]);
    let mut wedge = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            wedge += (a[i] * b[j] - a[j] * b[i]).powi(2);
        }
    }
    let wedge = wedge.sqrt();
    let fro2 = norm6(a).powi(2) + norm6(b).powi(2);
    // σ₁² = (‖A‖² + √(‖A‖⁴ − 4 wedge²)) / 2
    let s1 = ((fro2 + (fro2 * fro2 - 4.0 * wedge * wedge).max(0.0).sqrt()) / 2.0).sqrt();
    if s1 == 0.0 {
        return [0.0, 0.0];
    }
    [s1, wedge / s1]
}

/// Pivot columns for a rank-`rank` 2×6 system: largest magnitude first,
/// equal magnitudes resolved by position (i.e. global face order).
fn choose_pivots(rows: &[[f64; 6]; 2], rank: u8) -> Vec<usize> {
    let argmax = |v: &[f64; 6]| {
        let mut best = 0;
        for j in 1..6 {
            if v[j].abs() > v[best].abs() * (1.0 + 1e-12) {
                best = j;
            }
        }
        best
    };
    match rank {
        0 => Vec::new(),
        1 => {
            let r = if norm6(&rows[0]) >= norm6(&rows[1]) { &rows[0] } else { &rows[1] };
            vec![argmax(r)]
        }
        _ => {
            let (i0, j0) = (0..2)
                .flat_map(|i| (0..6).map(move |j| (i, j)))
                .fold((0, 0), |b, (i, j)| if rows[i][j].abs() > rows[b.0][b.1].abs() * (1.0 + 1e-12) { (i, j) } else { b });
            let other = 1 - i0;
            let f = rows[other][j0] / rows[i0][j0];
            let mut rest = [0.0; 6];
            for j in 0..6 {
                rest[j] = if j == j0 { 0.0 } else { rows[other][j] - f * rows[i0][j] };
            }
            vec![j0, argmax(&rest)]
        }
    }
}

fn norm6(v: &[f64; 6]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl FaceSubsystem {
    /// Rows of `C` restricted to this face: for each pivot, the coefficients
    /// on the free sub-face positions.
    fn dependent_rows(&self) -> Vec<(usize, Vec<(usize, f64)>)> {
        let free: Vec<usize> = (0..6).filter(|j| !self.pivots.contains(j)).collect();
        match self.rank {
            0 => Vec::new(),
            1 => {
                let r = if norm6(&self.rows[0]) >= norm6(&self.rows[1]) { &self.rows[0] } else { &self.rows[1] };
                let p = self.pivots[0];
                vec![(p, free.iter().map(|&j| (j, -r[j] / r[p])).collect())]
            }
            _ => {
                let (p, q) = (self.pivots[0], self.pivots[1]);
                let m = nalgebra::Matrix2::new(self.rows[0][p], self.rows[0][q], self.rows[1][p], self.rows[1][q]);
                let inv = m.try_inverse().expect("rank-two pivot block");
                let mut out = vec![(p, Vec::new()), (q, Vec::new())];
                for &j in &free {
                    let rhs = nalgebra::Vector2::new(self.rows[0][j], self.rows[1][j]);
                    let x = inv * rhs;
                    out[0].1.push((j, -x[0]));
                    out[1].1.push((j, -x[1]));
                }
                out
            }
        }
    }

    /// `|A c| / (scale ‖c‖)` for local coefficients `c`, measured against the
    /// uncancelled magnitude of the entries.
    pub fn residual(&self, c: &[f64; 6]) -> f64 {
        let cn = norm6(c);
        if self.scale == 0.0 || cn == 0.0 {
            return 0.0;
        }
        let r: f64 = self.rows.iter().map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>().powi(2)).sum();
        r.sqrt() / (self.scale * cn)
    }
}

/// Builds and row-reduces the per-face traction systems.
///
/// A subsystem of rank zero contributes no dependent faces; this is the case
/// on every face perpendicular to a material axis.
pub fn assemble_boundary_constraints(body: &Body, basis: &WhitneyBasis, tensor: &ElasticTensor) -> Result<ConstraintMap> {
    let k = basis.complex();
    if !std::ptr::eq(k, &body.fine) {
        return Err(Error::InvalidInput("basis must be built on the body's fine complex".into()));
    }
    let subsystems: Vec<FaceSubsystem> =
        (0..body.frames.len()).into_par_iter().map(|i| subsystem(body, basis, tensor, i)).collect();

    let mut is_dependent = vec![false; k.num_faces()];
    for s in &subsystems {
        for &p in &s.pivots {
            is_dependent[s.sub_faces[p]] = true;
        }
    }
    let interior: Vec<usize> = (0..k.num_faces()).filter(|&f| !k.is_boundary_face(f)).collect();
    let dependent: Vec<usize> = (0..k.num_faces()).filter(|&f| is_dependent[f]).collect();
    let free: Vec<usize> = (0..k.num_faces()).filter(|&f| k.is_boundary_face(f) && !is_dependent[f]).collect();
    let pos = |list: &[usize], f: usize| list.binary_search(&f).expect("listed");

    let mut t = Vec::new();
    for s in &subsystems {
        for (p, entries) in s.dependent_rows() {
            let r = pos(&dependent, s.sub_faces[p]);
            for (j, v) in entries {
                t.push((r, pos(&free, s.sub_faces[j]), v));
            }
        }
    }
    let c = CsrMatrix::from_triplets(dependent.len(), free.len(), t);
    let r_n = 2 * subsystems.len() - dependent.len();
    Ok(ConstraintMap { n_faces: k.num_faces(), interior, dependent, free, c, subsystems, r_n })
}

impl ConstraintMap {
    pub fn n_reduced(&self) -> usize {
        self.interior.len() + self.free.len()
    }

    /// `|F'| − 2(|F_∂| − r_n) − r_n`.
    pub fn dim_div_b(&self) -> usize {
        self.n_faces + self.r_n - 2 * self.subsystems.len()
    }

    /// Counts of subsystems with rank 2, 1 and 0.
    pub fn rank_census(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in &self.subsystems {
            c[2 - s.rank as usize] += 1;
        }
        c
    }

    /// Prolongation from reduced coordinates `[interior, free]` to all faces.
    pub fn prolongation(&self) -> CsrMatrix {
        let ni = self.interior.len();
        let mut t = Vec::with_capacity(self.n_reduced() + self.c.nnz());
        for (k, &f) in self.interior.iter().enumerate() {
            t.push((f, k, 1.0));
        }
        for (k, &f) in self.free.iter().enumerate() {
            t.push((f, ni + k, 1.0));
        }
        for (r, j, v) in self.c.triplets() {
            t.push((self.dependent[r], ni + j, v));
        }
        CsrMatrix::from_triplets(self.n_faces, self.n_reduced(), t)
    }

    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.prolongation().mul_vec(reduced)
    }

    /// Applies `Pᵀ` to a full-length vector (forcing restriction).
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.prolongation().transpose().mul_vec(full)
    }

    /// Worst relative residual of the raw traction equations for full
    /// coefficients `c`.
    pub fn raw_residual(&self, c: &[f64]) -> f64 {
        self.subsystems
            .iter()
            .map(|s| s.residual(&s.sub_faces.map(|g| c[g])))
            .fold(0.0, f64::max)
    }
}
