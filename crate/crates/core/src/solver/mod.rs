//! Shift-invert eigensolver and forced-response solves for the pencil
//! `K c = μ M c`, with `M` symmetric positive definite and `K` symmetric.
//!
//! Shifts follow the vibration convention `σ = −(2πf)²`: an undamped mode of
//! frequency `f_r` has `μ = −(2πf_r)²`.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

pub const DEFAULT_SEED: u64 = 0x00c4_1ad1;

/// `σ = −(2πf)²` for a frequency in Hz.
pub fn shift_for(frequency: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * frequency;
    -w * w
}

/// What a pencil eigenvalue means for the motion `e^{√μ t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frequency {
    /// Undamped vibration, Hz.
    Hz(f64),
    /// `μ = 0`: rigid / static mode.
    Rigid,
    /// `μ > 0`: exponentially growing or decaying, rate in 1/s.
    Damped { rate: f64 },
}

impl Frequency {
    pub fn hz(self) -> Option<f64> {
        match self {
            Frequency::Hz(f) => Some(f),
            Frequency::Rigid => Some(0.0),
            Frequency::Damped { .. } => None,
        }
    }
}

impl std::fmt::Display for Frequency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frequency::Hz(v) => write!(f, "{v:.8}"),
            Frequency::Rigid => write!(f, "0 (rigid)"),
            Frequency::Damped { rate } => write!(f, "damped (rate {rate:.6e} 1/s)"),
        }
    }
}

pub fn frequency_of(mu: f64) -> Frequency {
    if mu < 0.0 {
        Frequency::Hz((-mu).sqrt() / (2.0 * std::f64::consts::PI))
    } else if mu == 0.0 {
        Frequency::Rigid
    } else {
        Frequency::Damped { rate: mu.sqrt() }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    /// `μ` in `K c = μ M c`, 1/s².
    pub eigenvalue: f64,
    /// `cᵀ M c = 1`, largest-magnitude entry positive.
    pub vector: Vec<f64>,
    /// `‖K c − μ M c‖ / (‖K‖_∞ ‖c‖)`.
    pub residual: f64,
}

impl EigenPair {
    pub fn frequency(&self) -> Frequency {
        frequency_of(self.eigenvalue)
    }

    pub fn omega(&self) -> f64 {
        (-self.eigenvalue).max(0.0).sqrt()
    }
}

/// Sparse LU factors of `K − σM`.
pub struct Factorization {
    shift: f64,
    shifted: CsrMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("shift", &self.shift).field("n", &self.shifted.nrows()).finish()
    }
}

pub fn factorize_shifted(k: &CsrMatrix, m: &CsrMatrix, sigma: f64) -> Result<Factorization> {
    if k.nrows() != k.ncols() || m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("pencil matrices must be square".into()));
    }
    if k.nrows() != m.nrows() {
        return Err(Error::LengthMismatch { expected: k.nrows(), got: m.nrows() });
    }
    if !sigma.is_finite() {
        return Err(Error::InvalidInput("shift must be finite".into()));
    }
    let shifted = k.add_scaled(-sigma, m);
    Factorization::new(shifted, sigma)
}

impl Factorization {
    fn new(shifted: CsrMatrix, shift: f64) -> Result<Self> {
        let n = shifted.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("empty system".into()));
        }
        let t: Vec<_> = shifted.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let lu = match a.sp_lu() {
            Ok(lu) => lu,
            Err(faer::sparse::linalg::LuError::SymbolicSingular { .. }) => return Err(Error::SingularShift { shift }),
            Err(e) => return Err(Error::Factorization(format!("{e:?}"))),
        };
        let f = Self { shift, shifted, lu };
        // a zero pivot shows up as a non-finite solve
        let probe = f.solve(&vec![1.0; n]);
        if probe.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularShift { shift });
        }
        Ok(f)
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.shifted.nrows()
    }

    /// The matrix that was factorized, `K − σM`.
    pub fn shifted_matrix(&self) -> &CsrMatrix {
        &self.shifted
    }

    /// `(K − σM)⁻¹ b` with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.raw_solve(b);
        let ax = self.shifted.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let d = self.raw_solve(&r);
        x.iter_mut().zip(&d).for_each(|(x, d)| *x += d);
        x
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        let n = x.len();
        self.lu.solve_in_place(faer::MatMut::from_column_major_slice_mut(&mut x, n, 1));
        x
    }

    pub fn write_matrix_market(&self, w: &mut impl Write) -> Result<()> {
        self.shifted.write_matrix_market(w)
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub seed: u64,
    /// Krylov subspace size; defaults to `max(2k + 1, k + 20)` capped at `n`.
    pub ncv: Option<usize>,
    /// Defaults to `50 k`.
    pub max_restarts: Option<usize>,
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, ncv: None, max_restarts: None, tol: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub pairs: Vec<EigenPair>,
    pub restarts: usize,
    pub operator_applications: usize,
    /// One line per restart.
    pub log: Vec<String>,
}

pub fn eigs_near(k: &CsrMatrix, m: &CsrMatrix, sigma: f64, nev: usize) -> Result<Vec<EigenPair>> {
    let fac = factorize_shifted(k, m, sigma)?;
    Ok(eigs_near_with(&fac, k, m, nev, &LanczosOptions::default())?.pairs)
}

fn mdot(mx: &[f64], y: &[f64]) -> f64 {
    mx.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// M-orthonormal Krylov basis with the products `M v` kept alongside.
struct Basis<'a> {
    m: &'a CsrMatrix,
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl Basis<'_> {
    /// Two passes of classical Gram–Schmidt in the M-inner product; returns the
    /// projections and leaves the remainder in `w`.
    fn orthogonalize(&self, w: &mut [f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.v.len()];
        for _ in 0..2 {
            for (i, mv) in self.mv.iter().enumerate() {
                let c = mdot(mv, w);
                h[i] += c;
                w.iter_mut().zip(&self.v[i]).for_each(|(w, v)| *w -= c * v);
            }
        }
        h
    }

    /// Pushes `w / ‖w‖_M`; returns `‖w‖_M`.
    fn push(&mut self, mut w: Vec<f64>) -> f64 {
        let mut mw = self.m.mul_vec(&w);
        let nrm = mdot(&mw, &w).max(0.0).sqrt();
        w.iter_mut().for_each(|v| *v /= nrm);
        mw.iter_mut().for_each(|v| *v /= nrm);
        self.v.push(w);
        self.mv.push(mw);
        nrm
    }

    fn random_orthogonal(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        loop {
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let before = norm2(&w);
            self.orthogonalize(&mut w);
            if norm2(&w) > 1e-6 * before {
                return w;
            }
        }
    }

    /// `Σ_l V_l q_l`.
    fn combine(cols: &[Vec<f64>], q: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; cols[0].len()];
        for (l, c) in cols.iter().enumerate() {
            let s = q(l);
            if s != 0.0 {
                out.iter_mut().zip(c).for_each(|(o, c)| *o += s * c);
            }
        }
        out
    }
}

/// Normalizes to unit mass norm with the largest-magnitude entry positive.
pub fn normalize_mass(m: &CsrMatrix, c: &mut [f64]) {
    let nrm = mdot(&m.mul_vec(c), c).max(0.0).sqrt();
    if nrm == 0.0 {
        return;
    }
    let big = c.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    let s = big.signum() / nrm;
    c.iter_mut().for_each(|v| *v *= s);
}

fn pencil_residual(k: &CsrMatrix, m: &CsrMatrix, knorm: f64, mu: f64, x: &[f64]) -> f64 {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
    let scale = knorm.max(mu.abs() * m.norm_inf()) * norm2(x);
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

/// Thick-restart (Krylov–Schur) Lanczos on `(K − σM)⁻¹M` in the M-inner
/// product, with full reorthogonalization. Returns the `nev` pairs nearest the
/// factorization's shift, sorted by `|μ − σ|`.
pub fn eigs_near_with(
    fac: &Factorization,
    k: &CsrMatrix,
    m: &CsrMatrix,
    nev: usize,
    opts: &LanczosOptions,
) -> Result<EigenSolution> {
    let n = fac.dim();
    if k.nrows() != n || m.nrows() != n {
        return Err(Error::LengthMismatch { expected: n, got: if k.nrows() != n { k.nrows() } else { m.nrows() } });
    }
    if nev == 0 || nev > n {
        return Err(Error::InvalidInput(format!("requested {nev} eigenpairs of a {n}×{n} pencil")));
    }
    let sigma = fac.shift();
    let ncv = opts.ncv.unwrap_or((2 * nev + 1).max(nev + 20)).clamp(nev + 1, n.max(nev + 1)).min(n);
    let max_restarts = opts.max_restarts.unwrap_or(50 * nev);
    let knorm = k.norm_inf();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let op = |x: &[f64]| fac.solve(&m.mul_vec(x));

    let mut basis = Basis { m, v: Vec::with_capacity(ncv + 1), mv: Vec::with_capacity(ncv + 1) };
    let start = basis.random_orthogonal(&mut rng, n);
    basis.push(start);
    let mut h = DMatrix::<f64>::zeros(ncv, ncv);
    let mut kept = 0;
    let mut applications = 0;
    let mut log = Vec::new();
    let mut last_residuals = Vec::new();

    for restart in 0..=max_restarts {
        // expand to ncv columns
        let mut f = Vec::new();
        let mut beta = 0.0;
        for j in kept..ncv {
            let mut w = op(&basis.v[j]);
            applications += 1;
            let proj = basis.orthogonalize(&mut w);
            for (i, &c) in proj.iter().enumerate() {
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
            let wn = mdot(&m.mul_vec(&w), &w).max(0.0).sqrt();
            let hnorm = proj.iter().map(|c| c.abs()).fold(0.0, f64::max);
            let broke = !(wn > 1e-12 * hnorm.max(f64::MIN_POSITIVE));
            if j + 1 < ncv {
                if broke {
                    // invariant subspace: continue with a fresh direction
                    let r = basis.random_orthogonal(&mut rng, n);
                    basis.push(r);
                } else {
                    let nrm = basis.push(w);
                    h[(j + 1, j)] = nrm;
                    h[(j, j + 1)] = nrm;
                }
            } else {
                beta = if broke { 0.0 } else { wn };
                f = w;
            }
        }

        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..ncv).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()).then(a.cmp(&b)));

        // true residuals of the wanted Ritz pairs
        let mut pairs = Vec::with_capacity(nev);
        let mut converged = 0;
        last_residuals.clear();
        for &i in order.iter().take(nev) {
            let theta = eig.eigenvalues[i];
            let x = Basis::combine(&basis.v, |l| eig.eigenvectors[(l, i)]);
            let mu = if theta == 0.0 { f64::INFINITY } else { sigma + 1.0 / theta };
            let res = if mu.is_finite() { pencil_residual(k, m, knorm, mu, &x) } else { f64::INFINITY };
            last_residuals.push(res);
            if res <= opts.tol {
                converged += 1;
            }
            pairs.push(EigenPair { eigenvalue: mu, vector: x, residual: res });
        }
        log.push(format!(
            "restart {restart} ops {applications} converged {converged}/{nev} residuals {}",
            last_residuals.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(",")
        ));
        if converged == nev {
            for p in &mut pairs {
                normalize_mass(m, &mut p.vector);
                p.residual = pencil_residual(k, m, knorm, p.eigenvalue, &p.vector);
            }
            pairs.sort_by(|a, b| (a.eigenvalue - sigma).abs().total_cmp(&(b.eigenvalue - sigma).abs()));
            return Ok(EigenSolution { pairs, restarts: restart, operator_applications: applications, log });
        }
        if ncv == n && beta == 0.0 && restart > 0 {
            break;
        }

        // thick restart keeping the best Ritz vectors
        let keep = (nev + (ncv - nev) / 2).min(ncv - 1).max(nev.min(ncv - 1));
        let sel = &order[..keep];
        let v: Vec<Vec<f64>> = sel.iter().map(|&i| Basis::combine(&basis.v, |l| eig.eigenvectors[(l, i)])).collect();
        let mv: Vec<Vec<f64>> = sel.iter().map(|&i| Basis::combine(&basis.mv, |l| eig.eigenvectors[(l, i)])).collect();
        basis.v = v;
        basis.mv = mv;
        h.fill(0.0);
        for (c, &i) in sel.iter().enumerate() {
            h[(c, c)] = eig.eigenvalues[i];
        }
        if beta > 0.0 {
            for (c, &i) in sel.iter().enumerate() {
                let b = beta * eig.eigenvectors[(ncv - 1, i)];
                h[(keep, c)] = b;
                h[(c, keep)] = b;
            }
            // re-orthogonalize the residual against the rotated basis
            basis.orthogonalize(&mut f);
            basis.push(f);
        } else {
            let r = basis.random_orthogonal(&mut rng, n);
            basis.push(r);
        }
        kept = keep;
    }
    Err(Error::NoConvergence { restarts: max_restarts, residuals: last_residuals })
}

/// Lower bound on `1 / min |μ − σ|` from a short unrestarted Lanczos run: the
/// largest Ritz magnitude never exceeds the true one, and a near-singular
/// shift dominates the Krylov space after a few steps.
fn nearest_gap_estimate(fac: &Factorization, m: &CsrMatrix, steps: usize, seed: u64) -> f64 {
    let n = fac.dim();
    let steps = steps.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis = Basis { m, v: Vec::new(), mv: Vec::new() };
    let start = basis.random_orthogonal(&mut rng, n);
    basis.push(start);
    let mut h = DMatrix::<f64>::zeros(steps, steps);
    let mut used = steps;
    for j in 0..steps {
        let mut w = fac.solve(&m.mul_vec(&basis.v[j]));
        let proj = basis.orthogonalize(&mut w);
        for (i, &c) in proj.iter().enumerate() {
            h[(i, j)] = c;
            h[(j, i)] = c;
        }
        if j + 1 == steps {
            break;
        }
        let wn = mdot(&m.mul_vec(&w), &w).max(0.0).sqrt();
        if !(wn > 1e-12 * proj.iter().map(|c| c.abs()).fold(0.0, f64::max)) {
            used = j + 1;
            break;
        }
        let nrm = basis.push(w);
        h[(j + 1, j)] = nrm;
        h[(j, j + 1)] = nrm;
    }
    let theta = h.view((0, 0), (used, used)).into_owned().symmetric_eigenvalues().iter().map(|t| t.abs()).fold(0.0, f64::max);
    if theta == 0.0 {
        f64::INFINITY
    } else {
        1.0 / theta
    }
}

/// Factorized `−(ω²M + K)` for repeated forced solves at one drive frequency.
#[derive(Debug)]
pub struct ForcedSystem {
    fac: Factorization,
    omega: f64,
}

impl ForcedSystem {
    /// Fails with `NearResonance` when `−ω²` lies within `2·10⁻⁶ ω²` of a pencil
    /// eigenvalue (drive within 10⁻⁶ relative of an eigenfrequency).
    pub fn new(k: &CsrMatrix, m: &CsrMatrix, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidInput("drive frequency must be positive".into()));
        }
        let w2 = omega * omega;
        let fac = match factorize_shifted(k, m, -w2) {
            Err(Error::SingularShift { .. }) => return Err(Error::NearResonance { gap: 0.0 }),
            r => r?,
        };
        Self::from_factorization(fac, m)
    }

    /// Reuses factors of `K − σM`, e.g. from the eigensolve at the same
    /// drive frequency; `ω = √(−σ)`.
    pub fn from_factorization(fac: Factorization, m: &CsrMatrix) -> Result<Self> {
        let w2 = -fac.shift();
        if !(w2 > 0.0) {
            return Err(Error::InvalidInput("forced solve needs a negative shift −ω²".into()));
        }
        let gap = nearest_gap_estimate(&fac, m, 30, DEFAULT_SEED);
        if gap <= 2e-6 * w2 {
            return Err(Error::NearResonance { gap: gap / w2 });
        }
        Ok(Self { fac, omega: w2.sqrt() })
    }

    pub fn factorization(&self) -> &Factorization {
        &self.fac
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `c` with `−(ω²M + K) c = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.fac.dim() {
            return Err(Error::LengthMismatch { expected: self.fac.dim(), got: rhs.len() });
        }
        let mut c = self.fac.solve(rhs);
        c.iter_mut().for_each(|v| *v = -*v);
        Ok(c)
    }
}

pub fn solve_forced(k: &CsrMatrix, m: &CsrMatrix, omega: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    ForcedSystem::new(k, m, omega)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn diag(v: &[f64]) -> CsrMatrix {
        CsrMatrix::from_triplets(v.len(), v.len(), v.iter().enumerate().map(|(i, &x)| (i, i, x)).collect())
    }

    fn dense(a: &DMatrix<f64>) -> CsrMatrix {
        let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
        CsrMatrix::from_dense(&rows)
    }

    /// Random symmetric `K` and SPD `M`, with the dense generalized eigenvalues.
    fn random_pencil(n: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let k = (&a + a.transpose()) * 0.5;
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let m = &b * b.transpose() / n as f64 + DMatrix::identity(n, n);
        let l = m.clone().cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let s = &li * &k * li.transpose();
        let s = (&s + s.transpose()) * 0.5;
        let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        (k, m, ev)
    }

    #[test]
    fn frequency_tags() {
        let w = 2.0 * std::f64::consts::PI * 100.0;
        match frequency_of(-w * w) {
            Frequency::Hz(f) => assert!((f - 100.0).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
        assert_eq!(frequency_of(0.0), Frequency::Rigid);
        assert_eq!(frequency_of(1.0), Frequency::Damped { rate: 1.0 });
        assert_eq!(shift_for(100.0), -w * w);
    }

    #[test]
    fn identity_solves() {
        let k = diag(&[2.0, 3.0, 5.0, 7.0]);
        let f = factorize_shifted(&k, &CsrMatrix::identity(4), 0.0).unwrap();
        for j in 0..4 {
            let mut e = vec![0.0; 4];
            e[j] = 1.0;
            let x = f.solve(&k.mul_vec(&e));
            for i in 0..4 {
                assert!((x[i] - e[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // (K − σM)⁻¹ for K = [[2, 1], [1, 3]], M = I, σ = −1 is [[4, −1], [−1, 3]] / 11
        let k = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let f = factorize_shifted(&k, &CsrMatrix::identity(2), -1.0).unwrap();
        let x = f.solve(&[1.0, 0.0]);
        assert!((x[0] - 4.0 / 11.0).abs() < 1e-15 && (x[1] + 1.0 / 11.0).abs() < 1e-15);
        let y = f.solve(&[0.0, 1.0]);
        assert!((y[0] + 1.0 / 11.0).abs() < 1e-15 && (y[1] - 3.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn spd_solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let b = DMatrix::from_fn(50, 50, |_, _| rng.random_range(-1.0..1.0));
        let a = &b * b.transpose() + DMatrix::identity(50, 50);
        let s = dense(&a);
        let f = factorize_shifted(&s, &CsrMatrix::identity(50), 0.0).unwrap();
        let rhs: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = f.solve(&rhs);
        let r: Vec<f64> = s.mul_vec(&x).iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-10 * norm2(&rhs));
    }

    #[test]
    fn singular_shift_is_reported() {
        let k = diag(&[1.0, 2.0, 3.0]);
        let err = factorize_shifted(&k, &CsrMatrix::identity(3), 2.0).unwrap_err();
        assert_eq!(err.kind(), "singular-shift");
    }

    #[test]
    fn diagonal_pencil() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let k = diag(&v);
        let pairs = eigs_near(&k, &CsrMatrix::identity(10), 4.2, 1).unwrap();
        assert!((pairs[0].eigenvalue - 4.0).abs() < 1e-12);
        for (i, c) in pairs[0].vector.iter().enumerate() {
            assert!((c - if i == 3 { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }

    #[test]
    fn several_pairs_are_distinct_orthogonal_and_sorted() {
        let (k, m, ev) = random_pencil(120, 3);
        let (ks, ms) = (dense(&k), dense(&m));
        let sigma = ev[40] + 0.3 * (ev[41] - ev[40]);
        let pairs = eigs_near(&ks, &ms, sigma, 6).unwrap();
        assert_eq!(pairs.len(), 6);
        for w in pairs.windows(2) {
            assert!((w[0].eigenvalue - sigma).abs() <= (w[1].eigenvalue - sigma).abs());
            assert!((w[0].eigenvalue - w[1].eigenvalue).abs() > 1e-8);
        }
        for (i, p) in pairs.iter().enumerate() {
            assert!(p.residual <= 1e-8);
            let mp = ms.mul_vec(&p.vector);
            assert!((mdot(&mp, &p.vector) - 1.0).abs() < 1e-10);
            for q in &pairs[i + 1..] {
                assert!(mdot(&mp, &q.vector).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let (k, m, ev) = random_pencil(80, 4);
        let (ks, ms) = (dense(&k), dense(&m));
        let sigma = 0.6 * ev[10] + 0.4 * ev[11];
        let a = eigs_near(&ks, &ms, sigma, 3).unwrap();
        let b = eigs_near(&ks, &ms, sigma, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.eigenvalue - y.eigenvalue).abs() <= 1e-10 * x.eigenvalue.abs().max(1.0));
        }
    }

    #[test]
    fn forced_solve_cases() {
        let (k, m, _) = random_pencil(40, 5);
        let (ks, ms) = (dense(&k), dense(&m));
        let omega = 0.7;
        assert!(solve_forced(&ks, &ms, omega, &vec![0.0; 40]).unwrap().iter().all(|&v| v == 0.0));
        let mut e1 = vec![0.0; 40];
        e1[0] = 1.0;
        let a = -(&m * (omega * omega) + &k);
        let rhs: Vec<f64> = a.column(0).iter().copied().collect();
        let c = solve_forced(&ks, &ms, omega, &rhs).unwrap();
        for i in 0..40 {
            assert!((c[i] - e1[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn near_resonance_is_rejected() {
        let k = diag(&[-4.0, -9.0, -16.0, -25.0]);
        let m = CsrMatrix::identity(4);
        let err = solve_forced(&k, &m, 3.0 * (1.0 + 1e-8), &[1.0, 1.0, 1.0, 1.0]).unwrap_err();
        assert_eq!(err.kind(), "near-resonance");
        assert!(solve_forced(&k, &m, 3.5, &[1.0, 1.0, 1.0, 1.0]).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn nearest_eigenvalue_matches_dense(n in 5usize..60, seed in 0u64..1000, frac in 0.0f64..1.0) {
            let (k, m, ev) = random_pencil(n, seed);
            let sigma = ev[0] + frac * (ev[n - 1] - ev[0]) + 1e-3;
            let want = ev.iter().copied().min_by(|a, b| (a - sigma).abs().total_cmp(&(b - sigma).abs())).unwrap();
            let got = eigs_near(&dense(&k), &dense(&m), sigma, 1).unwrap();
            prop_assert!((got[0].eigenvalue - want).abs() <= 1e-8 * want.abs().max(1.0));
        }
    }
}
