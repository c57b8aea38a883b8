//! Forced resonance waves, their sampling on the far side of the body, nodal
//! (Chladni) point extraction and boundary-flux diagnostics.

mod flux;
mod nodal;

pub use flux::{boundary_flux, flux_entry, write_flux_csv, write_flux_table, FluxEntry, FluxRow, FluxTable};
pub use nodal::{
    default_times, nodal_points, sample_norms, write_chladni_svg, write_nodal_csv, FieldSampler, NodalReport,
    NormSamples,
};

use crate::assembly::{assemble_forcing, reduce_system, ConstraintMap, ForcingWave, WaveSign};
use crate::error::{Error, Result};
use crate::solver::{eigs_near_with, factorize_shifted, shift_for, EigenPair, ForcedSystem, LanczosOptions};
use crate::sparse::CsrMatrix;
use crate::whitney::WhitneyBasis;
use std::fmt;
use std::str::FromStr;

/// Coarse: all face fields of the fine complex, boundary conditions not
/// enforced. Fine: the traction-constrained subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Coarse,
    Fine,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Coarse => "coarse",
            BasisKind::Fine => "fine",
        })
    }
}

impl FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(BasisKind::Coarse),
            "fine" => Ok(BasisKind::Fine),
            _ => Err(Error::InvalidInput(format!("unknown basis '{s}' (expected coarse or fine)"))),
        }
    }
}

/// Mass/stiffness pencil in the coordinates of one basis.
#[derive(Clone, Debug)]
pub struct System {
    pub kind: BasisKind,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub constraints: Option<ConstraintMap>,
}

impl System {
    pub fn coarse(mass: CsrMatrix, stiffness: CsrMatrix) -> Self {
        Self { kind: BasisKind::Coarse, mass, stiffness, constraints: None }
    }

    pub fn fine(mass: &CsrMatrix, stiffness: &CsrMatrix, cmap: ConstraintMap) -> Self {
        let (mass, stiffness) = reduce_system(mass, stiffness, &cmap);
        Self { kind: BasisKind::Fine, mass, stiffness, constraints: Some(cmap) }
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// System coordinates → coefficients of every fine face.
    pub fn expand(&self, c: &[f64]) -> Vec<f64> {
        match &self.constraints {
            Some(cm) => cm.expand(c),
            None => c.to_vec(),
        }
    }

    /// Face-indexed load vector → system coordinates (`Pᵀ b`).
    pub fn restrict(&self, b: &[f64]) -> Vec<f64> {
        match &self.constraints {
            Some(cm) => cm.restrict(b),
            None => b.to_vec(),
        }
    }
}

/// Angular frequency of a mode. Eigenvalues within `zero_tol` of zero are
/// treated as rigid (`ω_r = 0`); clearly positive ones are not vibrations.
pub fn mode_omega(pair: &EigenPair, zero_tol: f64) -> Result<f64> {
    let mu = pair.eigenvalue;
    if mu < 0.0 {
        Ok((-mu).sqrt())
    } else if mu <= zero_tol {
        Ok(0.0)
    } else {
        Err(Error::DampedMode { eigenvalue: mu })
    }
}

/// Resolution of pencil eigenvalues at the solver's residual tolerance:
/// `1e−8 ‖K‖_∞ / min diag M`.
pub fn zero_eigenvalue_tol(system: &System) -> f64 {
    let dmin = system.mass.diagonal().into_iter().fold(f64::INFINITY, f64::min);
    1e-8 * system.stiffness.norm_inf() / dmin
}

/// Response with trivial initial data to the load `C₁ cos ωt ∓ C₂ sin ωt`,
/// one term per retained mode:
/// `Σ_r (c₁(cos ωt − cos ω_r t) ± c₂((ω/ω_r) sin ω_r t − sin ωt)) / (ω_r² − ω²)`.
#[derive(Clone, Debug)]
pub struct ResonanceWave {
    pub basis: BasisKind,
    pub omega: f64,
    pub sign: WaveSign,
    pub mode_omegas: Vec<f64>,
    /// Solutions of `−(ω²M + K)c_j = C_j`, system coordinates.
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    /// The same, expanded to all faces.
    pub full1: Vec<f64>,
    pub full2: Vec<f64>,
}

impl ResonanceWave {
    /// `loads` are the face-indexed `(C₁, C₂)`; they are restricted to the
    /// system's coordinates here.
    pub fn new(
        system: &System,
        forced: &ForcedSystem,
        loads: (&[f64], &[f64]),
        mode_omegas: Vec<f64>,
        sign: WaveSign,
    ) -> Result<Self> {
        if mode_omegas.is_empty() {
            return Err(Error::InvalidInput("a resonance wave needs at least one mode".into()));
        }
        let omega = forced.omega();
        for &wr in &mode_omegas {
            if (wr - omega).abs() <= 1e-6 * omega {
                return Err(Error::NearResonance { gap: (wr - omega).abs() / omega });
            }
        }
        let c1 = forced.solve(&system.restrict(loads.0))?;
        let c2 = forced.solve(&system.restrict(loads.1))?;
        let full1 = system.expand(&c1);
        let full2 = system.expand(&c2);
        Ok(Self { basis: system.kind, omega, sign, mode_omegas, c1, c2, full1, full2 })
    }

    /// `(a₁(t), a₂(t))` with coefficients `a₁ c₁ + a₂ c₂`.
    pub fn time_factors(&self, t: f64) -> (f64, f64) {
        let w = self.omega;
        let pm = -self.sign.factor();
        let mut a = (0.0, 0.0);
        for &wr in &self.mode_omegas {
            let d = wr * wr - w * w;
            // (ω/ω_r) sin ω_r t → ωt as ω_r → 0
            let s = if wr == 0.0 { w * t } else { w / wr * (wr * t).sin() };
            a.0 += ((w * t).cos() - (wr * t).cos()) / d;
            a.1 += pm * (s - (w * t).sin()) / d;
        }
        a
    }

    /// Time derivatives of [`Self::time_factors`].
    pub fn rate_factors(&self, t: f64) -> (f64, f64) {
        let w = self.omega;
        let pm = -self.sign.factor();
        let mut a = (0.0, 0.0);
        for &wr in &self.mode_omegas {
            let d = wr * wr - w * w;
            a.0 += (wr * (wr * t).sin() - w * (w * t).sin()) / d;
            a.1 += pm * (w * (wr * t).cos() - w * (w * t).cos()) / d;
        }
        a
    }

    /// Coefficients in system coordinates at time `t`.
    pub fn coefficients(&self, t: f64) -> Vec<f64> {
        let (a1, a2) = self.time_factors(t);
        self.c1.iter().zip(&self.c2).map(|(x, y)| a1 * x + a2 * y).collect()
    }

    /// Coefficients of every fine face at time `t`.
    pub fn full_coefficients(&self, t: f64) -> Vec<f64> {
        let (a1, a2) = self.time_factors(t);
        self.full1.iter().zip(&self.full2).map(|(x, y)| a1 * x + a2 * y).collect()
    }
}

/// Everything computed for one drive frequency in one basis.
#[derive(Clone, Debug)]
pub struct ResonanceRun {
    pub frequency: f64,
    /// Sorted by distance of the eigenvalue from `−ω²`.
    pub pairs: Vec<EigenPair>,
    pub wave: ResonanceWave,
    pub eigen_log: Vec<String>,
}

/// Eigensolve at `σ = −(2πf)²`, forcing assembly and the forced solves, with
/// one shared factorization. `modes` pairs nearest the shift contribute.
pub fn resonate(
    system: &System,
    basis: &WhitneyBasis,
    forcing: &ForcingWave,
    modes: usize,
    opts: &LanczosOptions,
) -> Result<ResonanceRun> {
    let f = forcing.frequency;
    let fac = factorize_shifted(&system.stiffness, &system.mass, shift_for(f))?;
    let sol = eigs_near_with(&fac, &system.stiffness, &system.mass, modes, opts)?;
    let tol = zero_eigenvalue_tol(system);
    let omegas = sol.pairs.iter().map(|p| mode_omega(p, tol)).collect::<Result<Vec<_>>>()?;
    let forced = ForcedSystem::from_factorization(fac, &system.mass)?;
    let (c1, c2) = assemble_forcing(basis, forcing);
    let wave = ResonanceWave::new(system, &forced, (&c1, &c2), omegas, forcing.sign)?;
    Ok(ResonanceRun { frequency: f, pairs: sol.pairs, wave, eigen_log: sol.log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_forced;

    fn toy() -> (System, ForcedSystem) {
        let k = CsrMatrix::from_triplets(3, 3, vec![(0, 0, -4.0), (1, 1, -9.0), (2, 2, -30.0), (0, 1, 0.5), (1, 0, 0.5)]);
        let m = CsrMatrix::identity(3);
        let forced = ForcedSystem::new(&k, &m, 2.5).unwrap();
        (System::coarse(m, k), forced)
    }

    #[test]
    fn zero_load_gives_zero_wave() {
        let (sys, forced) = toy();
        let z = vec![0.0; 3];
        let w = ResonanceWave::new(&sys, &forced, (&z, &z), vec![2.0], WaveSign::Minus).unwrap();
        for t in [0.0, 0.3, 1.7] {
            assert!(w.coefficients(t).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn trivial_initial_data() {
        let (sys, forced) = toy();
        let (b1, b2) = ([1.0, -2.0, 0.5], [0.3, 0.1, -1.0]);
        for sign in [WaveSign::Minus, WaveSign::Plus] {
            for modes in [vec![2.0], vec![2.0, 3.0, 0.0]] {
                let w = ResonanceWave::new(&sys, &forced, (&b1, &b2), modes, sign).unwrap();
                assert_eq!(w.time_factors(0.0), (0.0, 0.0));
                assert_eq!(w.rate_factors(0.0), (0.0, 0.0));
                // the analytic rate agrees with a central difference
                for t in [0.4, 1.1] {
                    let h = 1e-6;
                    let (p, q) = (w.time_factors(t + h), w.time_factors(t - h));
                    let r = w.rate_factors(t);
                    assert!(((p.0 - q.0) / (2.0 * h) - r.0).abs() < 1e-6);
                    assert!(((p.1 - q.1) / (2.0 * h) - r.1).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn coefficients_solve_the_forced_system() {
        let (sys, forced) = toy();
        let b1 = [1.0, -2.0, 0.5];
        let w = ResonanceWave::new(&sys, &forced, (&b1, &[0.0; 3]), vec![2.0], WaveSign::Minus).unwrap();
        let want = solve_forced(&sys.stiffness, &sys.mass, 2.5, &b1).unwrap();
        for (a, b) in w.c1.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_satisfies_the_ode_in_the_mode_direction() {
        // for M = I, K = −ω_r², (ω_r² − ω²)·w solves q'' = K q + C₁ cos ωt ∓ C₂ sin ωt
        // with q(0) = q'(0) = 0; the extra factor is a per-mode scale
        let k = CsrMatrix::from_triplets(1, 1, vec![(0, 0, -4.0)]);
        let m = CsrMatrix::identity(1);
        let sys = System::coarse(m.clone(), k.clone());
        let forced = ForcedSystem::new(&k, &m, 3.0).unwrap();
        for sign in [WaveSign::Minus, WaveSign::Plus] {
            let w = ResonanceWave::new(&sys, &forced, (&[0.7], &[-0.4]), vec![2.0], sign).unwrap();
            for t in [0.2, 0.9, 2.3] {
                let h = 1e-4;
                let q = |t: f64| (4.0 - 9.0) * w.coefficients(t)[0];
                let acc = (q(t + h) - 2.0 * q(t) + q(t - h)) / (h * h);
                let load = 0.7 * (3.0 * t).cos() + sign.factor() * -0.4 * (3.0 * t).sin();
                assert!((acc - (-4.0 * q(t) + load)).abs() < 1e-5, "{sign:?} {t}");
            }
        }
    }

    #[test]
    fn basis_kind_round_trip() {
        for b in [BasisKind::Coarse, BasisKind::Fine] {
            assert_eq!(b.to_string().parse::<BasisKind>().unwrap(), b);
        }
        assert!("medium".parse::<BasisKind>().is_err());
    }

    #[test]
    fn mode_omega_tags() {
        let p = |mu| EigenPair { eigenvalue: mu, vector: vec![], residual: 0.0 };
        assert_eq!(mode_omega(&p(-9.0), 1e-3).unwrap(), 3.0);
        assert_eq!(mode_omega(&p(1e-4), 1e-3).unwrap(), 0.0);
        assert_eq!(mode_omega(&p(1.0), 1e-3).unwrap_err().kind(), "damped-mode");
    }
}
