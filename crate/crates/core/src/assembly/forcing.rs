use crate::error::{Error, Result};
use crate::mesh::SimplicialComplex3;
use crate::whitney::{quadrature, WhitneyBasis};
use crate::Vec3;
use rayon::prelude::*;
use std::io::Write;

/// Branch of `F = F₀ sin(k·x ∓ ωt)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WaveSign {
    /// `sin(k·x − ωt)`: travels along the propagation direction.
    #[default]
    Minus,
    Plus,
}

impl WaveSign {
    /// The `∓` factor multiplying the `sin(ωt)` term.
    pub fn factor(self) -> f64 {
        match self {
            WaveSign::Minus => -1.0,
            WaveSign::Plus => 1.0,
        }
    }
}

/// External plane pressure wave, phase referenced to its source point.
#[derive(Clone, Debug)]
pub struct ForcingWave {
    /// Body-force density amplitude, N/m³.
    pub amplitude: Vec3,
    /// Unit propagation direction.
    pub direction: Vec3,
    /// m/s.
    pub speed: f64,
    /// Hz.
    pub frequency: f64,
    pub source: Vec3,
    pub sign: WaveSign,
}

pub const SPEED_OF_SOUND: f64 = 343.0;

impl ForcingWave {
    pub fn new(amplitude: Vec3, direction: Vec3, speed: f64, frequency: f64, source: Vec3, sign: WaveSign) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("propagation direction must be nonzero".into()));
        }
        if !(speed > 0.0) || !(frequency > 0.0) {
            return Err(Error::InvalidInput("wave speed and frequency must be positive".into()));
        }
        Ok(Self { amplitude, direction: direction / n, speed, frequency, source, sign })
    }

    /// Wave of unit amplitude along `direction`, with its source `distance`
    /// metres before the body on the line through the centre of the body's
    /// cross-section.
    pub fn toward(body: &SimplicialComplex3, direction: Vec3, frequency: f64, distance: f64, sign: WaveSign) -> Result<Self> {
        let d = direction.normalize();
        let (lo, hi) = body.bounds();
        let centre = (lo + hi) / 2.0;
        let near = body.vertices().iter().map(|p| crate::v3(*p).dot(&d)).fold(f64::INFINITY, f64::min);
        let source = centre + d * (near - centre.dot(&d) - distance);
        Self::new(d, d, SPEED_OF_SOUND, frequency, source, sign)
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency
    }

    pub fn wave_vector(&self) -> Vec3 {
        self.direction * (self.omega() / self.speed)
    }

    /// Spatial phase `k·(x − x_s)`.
    pub fn phase(&self, x: &Vec3) -> f64 {
        self.wave_vector().dot(&(x - self.source))
    }

    pub fn eval(&self, x: &Vec3, t: f64) -> Vec3 {
        self.amplitude * (self.phase(x) + self.sign.factor() * self.omega() * t).sin()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { amplitude: self.amplitude * s, ..self.clone() }
    }
}

/// `C₁_f = ⟨F₀ sin(k·x), W_f⟩` and `C₂_f = ⟨F₀ cos(k·x), W_f⟩` by per-tet
/// quadrature, so that `⟨F, W_f⟩ = C₁ cos ωt ∓ C₂ sin ωt`.
pub fn assemble_forcing(basis: &WhitneyBasis, wave: &ForcingWave) -> (Vec<f64>, Vec<f64>) {
    let k = basis.complex();
    let rule = quadrature::tet_rule();
    let locals: Vec<[[f64; 4]; 2]> = (0..k.num_tets())
        .into_par_iter()
        .map(|t| {
            let p = k.tet_points(t);
            let vol = basis.volume(t);
            let v: [_; 4] = std::array::from_fn(|i| basis.face_vectors(t, i));
            let mut out = [[0.0; 4]; 2];
            for (l, w) in rule {
                let x: Vec3 = (0..4).map(|i| p[i] * l[i]).sum();
                let ph = wave.phase(&x);
                let (s, c) = ph.sin_cos();
                for i in 0..4 {
                    let wf: Vec3 = (0..4).map(|m| v[i][m] * l[m]).sum();
                    let fw = wave.amplitude.dot(&wf) * w * vol;
                    out[0][i] += s * fw;
                    out[1][i] += c * fw;
                }
            }
            out
        })
        .collect();
    let mut c1 = vec![0.0; k.num_faces()];
    let mut c2 = vec![0.0; k.num_faces()];
    for (t, loc) in locals.iter().enumerate() {
        for (i, &f) in k.tet_faces(t).iter().enumerate() {
            c1[f] += loc[0][i];
            c2[f] += loc[1][i];
        }
    }
    (c1, c2)
}

pub fn write_forcing_csv(w: &mut impl Write, c1: &[f64], c2: &[f64]) -> Result<()> {
    crate::sparse::write_vector_csv(w, "index,c1,c2", &[c1, c2])
}
