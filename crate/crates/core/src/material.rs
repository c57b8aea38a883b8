//! Orthotropic elastic moduli and the tensor contractions used in assembly.
//!
//! Axes are (1, 2, 3) = (r, θ, z) = (x, y, z); Voigt pairs are ordered
//! (11, 22, 33, 23, 31, 12).

use crate::error::{Error, Result};
use crate::{Mat3, Vec3};
use serde::{Deserialize, Serialize};

const VOIGT: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];

/// Engineering constants in Pa. `mu_ij` is the Poisson ratio with the
/// compatibility relation `mu_ij / e_i = mu_ji / e_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineeringConstants {
    pub e_r: f64,
    pub e_theta: f64,
    pub e_z: f64,
    pub g_thetaz: f64,
    pub g_rz: f64,
    pub g_rtheta: f64,
    pub mu_rtheta: f64,
    pub mu_thetar: f64,
    pub mu_rz: f64,
    pub mu_zr: f64,
    pub mu_thetaz: f64,
    pub mu_ztheta: f64,
}

impl EngineeringConstants {
    /// Engelmann spruce: modulus ratios and Poisson ratios from the
    /// Wood Handbook tables, `e_z = 9790 MPa`.
    pub fn engelmann_spruce() -> Self {
        let e_z = 9790e6;
        Self {
            e_r: 0.128 * e_z,
            e_theta: 0.059 * e_z,
            e_z,
            g_thetaz: 0.120 * e_z,
            g_rz: 0.124 * e_z,
            g_rtheta: 0.010 * e_z,
            mu_rtheta: 0.530,
            mu_thetar: 0.255,
            mu_rz: 0.083,
            mu_zr: 0.422,
            mu_thetaz: 0.058,
            mu_ztheta: 0.462,
        }
    }

    pub fn isotropic(e: f64, nu: f64) -> Self {
        let g = e / (2.0 * (1.0 + nu));
        Self {
            e_r: e,
            e_theta: e,
            e_z: e,
            g_thetaz: g,
            g_rz: g,
            g_rtheta: g,
            mu_rtheta: nu,
            mu_thetar: nu,
            mu_rz: nu,
            mu_zr: nu,
            mu_thetaz: nu,
            mu_ztheta: nu,
        }
    }

    /// Normal-strain block of the compliance, rows and columns (r, θ, z).
    pub fn compliance3(&self) -> Mat3 {
        let c = self;
        Mat3::new(
            1.0 / c.e_r,
            -c.mu_thetar / c.e_theta,
            -c.mu_zr / c.e_z,
            -c.mu_rtheta / c.e_r,
            1.0 / c.e_theta,
            -c.mu_ztheta / c.e_z,
            -c.mu_rz / c.e_r,
            -c.mu_thetaz / c.e_theta,
            1.0 / c.e_z,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let moduli = [self.e_r, self.e_theta, self.e_z, self.g_thetaz, self.g_rz, self.g_rtheta];
        if moduli.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput("elastic and rigidity moduli must be positive".into()));
        }
        Ok(())
    }
}

/// Replaces each pair `(mu_ij/e_i, mu_ji/e_j)` by its mean and back-solves the
/// ratios, so the compliance becomes symmetric.
pub fn symmetrize(c: &EngineeringConstants) -> EngineeringConstants {
    let mut s = *c;
    let avg = |mu_ij: f64, e_i: f64, mu_ji: f64, e_j: f64| 0.5 * (mu_ij / e_i + mu_ji / e_j);
    let a = avg(c.mu_rtheta, c.e_r, c.mu_thetar, c.e_theta);
    s.mu_rtheta = a * c.e_r;
    s.mu_thetar = a * c.e_theta;
    let a = avg(c.mu_rz, c.e_r, c.mu_zr, c.e_z);
    s.mu_rz = a * c.e_r;
    s.mu_zr = a * c.e_z;
    let a = avg(c.mu_thetaz, c.e_theta, c.mu_ztheta, c.e_z);
    s.mu_thetaz = a * c.e_theta;
    s.mu_ztheta = a * c.e_z;
    s
}

/// Fourth-order elasticity tensor with its Voigt matrix and density.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticTensor {
    voigt: [[f64; 6]; 6],
    w4: [f64; 81],
    /// Density, kg/m³.
    pub rho: f64,
}

#[inline]
fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

impl ElasticTensor {
    /// Four-index components read off the Voigt matrix entry by entry.
    pub fn from_voigt(voigt: [[f64; 6]; 6], rho: f64) -> Self {
        let mut w4 = [0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        w4[idx(i, j, k, l)] = voigt[VOIGT[i][j]][VOIGT[k][l]];
                    }
                }
            }
        }
        Self { voigt, w4, rho }
    }

    /// Arbitrary four-index components; the Voigt matrix is read back from the
    /// representative index pairs.
    pub fn from_four_index(w: impl Fn(usize, usize, usize, usize) -> f64, rho: f64) -> Self {
        let mut w4 = [0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        w4[idx(i, j, k, l)] = w(i, j, k, l);
                    }
                }
            }
        }
        let pair = [(0, 0), (1, 1), (2, 2), (1, 2), (2, 0), (0, 1)];
        let mut voigt = [[0.0; 6]; 6];
        for (p, &(i, j)) in pair.iter().enumerate() {
            for (q, &(k, l)) in pair.iter().enumerate() {
                voigt[p][q] = w4[idx(i, j, k, l)];
            }
        }
        Self { voigt, w4, rho }
    }

    pub fn zero(rho: f64) -> Self {
        Self::from_voigt([[0.0; 6]; 6], rho)
    }

    /// Inverts the normal block of the compliance and places the rigidity
    /// moduli on the shear diagonal.
    pub fn from_engineering(c: &EngineeringConstants, rho: f64) -> Result<Self> {
        c.validate()?;
        let u = c.compliance3();
        let scale = u.abs().max();
        if u.determinant().abs() <= 1e-12 * scale * scale * scale {
            return Err(Error::SingularCompliance);
        }
        let w = u.try_inverse().ok_or(Error::SingularCompliance)?;
        // inversion round-off would otherwise break W^{ijkl} = W^{klij}
        let w = (w + w.transpose()) * 0.5;
        let mut v = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] = w[(i, j)];
            }
        }
        v[3][3] = c.g_thetaz;
        v[4][4] = c.g_rz;
        v[5][5] = c.g_rtheta;
        Ok(Self::from_voigt(v, rho))
    }

    pub fn voigt(&self) -> &[[f64; 6]; 6] {
        &self.voigt
    }

    #[inline]
    pub fn w4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.w4[idx(i, j, k, l)]
    }

    /// `A^{αβ}_{ij} = W^{iαjβ}`.
    #[inline]
    pub fn a(&self, alpha: usize, beta: usize, i: usize, j: usize) -> f64 {
        self.w4(i, alpha, j, beta)
    }

    pub fn w3(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.voigt[i][j])
    }

    pub fn d3(&self) -> [f64; 3] {
        [self.voigt[3][3], self.voigt[4][4], self.voigt[5][5]]
    }

    /// Eigenvalues of the normal block (ascending) followed by the shear diagonal.
    pub fn coercivity_eigenvalues(&self) -> [f64; 6] {
        let w = self.w3();
        let mut e: Vec<f64> = w.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let d = self.d3();
        [e[0], e[1], e[2], d[0], d[1], d[2]]
    }

    pub fn is_coercive(&self) -> bool {
        self.coercivity_eigenvalues().iter().all(|&e| e > 0.0)
    }

    /// Compliance recovered from the tensor (normal block inverse, shear reciprocals).
    pub fn compliance(&self) -> Result<[[f64; 6]; 6]> {
        let u = self.w3().try_inverse().ok_or(Error::SingularCompliance)?;
        let mut out = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = u[(i, j)];
            }
        }
        for (k, d) in self.d3().iter().enumerate() {
            if *d == 0.0 {
                return Err(Error::SingularCompliance);
            }
            out[3 + k][3 + k] = 1.0 / d;
        }
        Ok(out)
    }

    /// `Σ A^{αβ}_{ij} G1[(α,i)] G2[(β,j)]` for displacement gradients
    /// `G[(α, i)] = ∂_i u^α`.
    pub fn pair(&self, g1: &Mat3, g2: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for al in 0..3 {
                let a = g1[(al, i)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..3 {
                    for be in 0..3 {
                        s += a * self.w4[idx(i, al, j, be)] * g2[(be, j)];
                    }
                }
            }
        }
        s
    }

    /// Stress `σ^{αi} = W^{αiβj} G[(β, j)]`.
    pub fn stress(&self, g: &Mat3) -> Mat3 {
        Mat3::from_fn(|al, i| {
            let mut s = 0.0;
            for be in 0..3 {
                for j in 0..3 {
                    s += self.w4[idx(al, i, be, j)] * g[(be, j)];
                }
            }
            s
        })
    }

    /// `(W'(1)N)^α = W^{αijj} N^i`.
    pub fn w_prime_n(&self, n: &Vec3) -> Vec3 {
        Vec3::from_fn(|al, _| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += self.w4[idx(al, i, j, j)] * n[i];
                }
            }
            s
        })
    }

    pub fn sigma_n(&self, g: &Mat3, n: &Vec3) -> Vec3 {
        self.stress(g) * n
    }

    /// `(W'(1)N, σ(G)N)`.
    pub fn boundary_products(&self, n: &Vec3, g: &Mat3) -> (Vec3, Vec3) {
        (self.w_prime_n(n), self.sigma_n(g, n))
    }

    /// `max |W^{ijkl} − W^{klij}|`, zero for a tensor with major symmetry.
    pub fn major_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        m = m.max((self.w4(i, j, k, l) - self.w4(k, l, i, j)).abs());
                    }
                }
            }
        }
        m
    }
}

/// Material description on disk: moduli in MPa, density in kg/m³.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaterialFile {
    pub name: String,
    pub e_r: f64,
    pub e_theta: f64,
    pub e_z: f64,
    pub g_thetaz: f64,
    pub g_rz: f64,
    pub g_rtheta: f64,
    pub mu_rtheta: f64,
    pub mu_thetar: f64,
    pub mu_rz: f64,
    pub mu_zr: f64,
    pub mu_thetaz: f64,
    pub mu_ztheta: f64,
    pub density: f64,
    #[serde(default = "yes")]
    pub symmetrize: bool,
}

fn yes() -> bool {
    true
}

impl MaterialFile {
    pub fn constants(&self) -> EngineeringConstants {
        EngineeringConstants {
            e_r: self.e_r * 1e6,
            e_theta: self.e_theta * 1e6,
            e_z: self.e_z * 1e6,
            g_thetaz: self.g_thetaz * 1e6,
            g_rz: self.g_rz * 1e6,
            g_rtheta: self.g_rtheta * 1e6,
            mu_rtheta: self.mu_rtheta,
            mu_thetar: self.mu_thetar,
            mu_rz: self.mu_rz,
            mu_zr: self.mu_zr,
            mu_thetaz: self.mu_thetaz,
            mu_ztheta: self.mu_ztheta,
        }
    }

    pub fn tensor(&self) -> Result<ElasticTensor> {
        if !(self.density > 0.0) {
            return Err(Error::InvalidInput("density must be positive".into()));
        }
        let c = if self.symmetrize { symmetrize(&self.constants()) } else { self.constants() };
        ElasticTensor::from_engineering(&c, self.density)
    }
}

/// Built-in materials by name.
pub fn preset(name: &str) -> Result<MaterialFile> {
    match name {
        "engelmann-spruce" => {
            let c = EngineeringConstants::engelmann_spruce();
            Ok(MaterialFile {
                name: name.into(),
                e_r: c.e_r / 1e6,
                e_theta: c.e_theta / 1e6,
                e_z: c.e_z / 1e6,
                g_thetaz: c.g_thetaz / 1e6,
                g_rz: c.g_rz / 1e6,
                g_rtheta: c.g_rtheta / 1e6,
                mu_rtheta: c.mu_rtheta,
                mu_thetar: c.mu_thetar,
                mu_rz: c.mu_rz,
                mu_zr: c.mu_zr,
                mu_thetaz: c.mu_thetaz,
                mu_ztheta: c.mu_ztheta,
                density: 360.0,
                symmetrize: true,
            })
        }
        other => Err(Error::InvalidInput(format!("unknown material preset '{other}'"))),
    }
}

pub fn load_material(spec: &str) -> Result<ElasticTensor> {
    let file = match preset(spec) {
        Ok(f) => f,
        Err(_) if std::path::Path::new(spec).exists() => serde_json::from_str(&std::fs::read_to_string(spec)?)?,
        Err(e) => return Err(e),
    };
    file.tensor()
}

pub fn engelmann_spruce() -> ElasticTensor {
    preset("engelmann-spruce").and_then(|m| m.tensor()).expect("built-in preset is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn spruce_blocks() {
        let t = engelmann_spruce();
        let w = t.w3() / 1e7;
        let want = [
            [157.198269065, 44.1920517122, 116.065341960],
            [44.1920517122, 72.0200103886, 75.6887032003],
            [116.065341960, 75.6887032003, 1095.80735959],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!(rel(w[(i, j)], want[i][j]) < 1e-8, "{i}{j}: {}", w[(i, j)]);
            }
        }
        let d = t.d3();
        for (got, want) in d.iter().zip([117.480, 121.396, 9.790]) {
            assert!(rel(got / 1e7, want) < 1e-12);
        }
    }

    #[test]
    fn symmetrize_is_idempotent_and_compatible() {
        let c = symmetrize(&EngineeringConstants::engelmann_spruce());
        let u = c.compliance3();
        assert!((u - u.transpose()).abs().max() <= 1e-15 * u.abs().max());
        let c2 = symmetrize(&c);
        for (a, b) in [(c.mu_rtheta, c2.mu_rtheta), (c.mu_zr, c2.mu_zr), (c.mu_thetaz, c2.mu_thetaz)] {
            assert!(rel(a, b) < 1e-15);
        }
        let iso = EngineeringConstants::isotropic(1e9, 0.3);
        assert_eq!(symmetrize(&iso), iso);
    }

    #[test]
    fn isotropic_has_two_eigenvalues() {
        let (e, nu) = (1e9, 0.25);
        let t = ElasticTensor::from_engineering(&EngineeringConstants::isotropic(e, nu), 1.0).unwrap();
        let ev = t.coercivity_eigenvalues();
        let bulk3 = e / (1.0 - 2.0 * nu); // 3K
        let lame2mu = e / (1.0 + nu); // 2μ
        assert!(rel(ev[2], bulk3) < 1e-12);
        assert!(rel(ev[0], lame2mu) < 1e-12);
        assert!(rel(ev[1], lame2mu) < 1e-12);
    }

    #[test]
    fn identity_compliance_gives_identity() {
        let c = EngineeringConstants::isotropic(1.0, 0.0);
        let t = ElasticTensor::from_engineering(&c, 1.0).unwrap();
        assert!((t.w3() - Mat3::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn singular_compliance_rejected() {
        // nu = 1/2 with these moduli makes the normal block singular
        let c = EngineeringConstants::isotropic(1.0, 0.5);
        assert!(matches!(ElasticTensor::from_engineering(&c, 1.0), Err(Error::SingularCompliance)));
    }

    #[test]
    fn compliance_roundtrip() {
        let c = symmetrize(&EngineeringConstants::engelmann_spruce());
        let t = ElasticTensor::from_engineering(&c, 360.0).unwrap();
        let u = t.compliance().unwrap();
        let u0 = c.compliance3();
        for i in 0..3 {
            for j in 0..3 {
                assert!((u[i][j] - u0[(i, j)]).abs() <= 1e-10 * u0.abs().max());
            }
        }
        assert!(rel(u[5][5], 1.0 / c.g_rtheta) < 1e-15);
    }

    #[test]
    fn tensor_symmetries() {
        let t = engelmann_spruce();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let w = t.w4(i, j, k, l);
                        assert_eq!(w, t.w4(j, i, k, l));
                        assert_eq!(w, t.w4(i, j, l, k));
                        assert_eq!(w, t.w4(k, l, i, j));
                    }
                }
            }
        }
        // no coupling between normal and shear strains
        for i in 0..3 {
            for j in 3..6 {
                assert_eq!(t.voigt()[i][j], 0.0);
            }
        }
    }

    #[test]
    fn w_prime_n_matches_row_sums() {
        let t = engelmann_spruce();
        let n = Vec3::z();
        let w = t.w3();
        let got = t.w_prime_n(&n);
        // along an axis the only contributions are W^{33jj}
        assert!((got.z - (w[(2, 0)] + w[(2, 1)] + w[(2, 2)])).abs() < 1e-6);
        assert_eq!(got.x, 0.0);
        assert_eq!(got.y, 0.0);
    }

    #[test]
    fn boundary_products_brute_force() {
        let t = engelmann_spruce();
        let n = Vec3::new(0.3, -0.5, 0.8).normalize();
        let g = Mat3::new(0.1, 0.2, -0.3, 0.4, 0.5, 0.6, -0.7, 0.8, 0.9);
        let (wp, sn) = t.boundary_products(&n, &g);
        let mut wp2 = Vec3::zeros();
        let mut sn2 = Vec3::zeros();
        for al in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    wp2[al] += t.w4(al, i, j, j) * n[i];
                    for be in 0..3 {
                        sn2[al] += t.w4(al, i, be, j) * g[(be, j)] * n[i];
                    }
                }
            }
        }
        assert!((wp - wp2).norm() <= 1e-12 * wp.norm());
        assert!((sn - sn2).norm() <= 1e-12 * sn.norm());
        assert_eq!(t.sigma_n(&Mat3::zeros(), &n), Vec3::zeros());
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("oak").is_err());
    }

    proptest! {
        #[test]
        fn strain_energy_positive(e in proptest::array::uniform6(-1.0f64..1.0)) {
            prop_assume!(e.iter().any(|v| v.abs() > 1e-6));
            let t = engelmann_spruce();
            let s = Mat3::new(e[0], e[5], e[4], e[5], e[1], e[3], e[4], e[3], e[2]);
            prop_assert!(t.pair(&s, &s) > 0.0);
        }

        #[test]
        fn gram_tensors_are_coercive(m in proptest::array::uniform9(-1.0f64..1.0), d in proptest::array::uniform3(0.1f64..2.0)) {
            let a = Mat3::from_row_slice(&m) + Mat3::identity() * 0.1;
            let w = a * a.transpose();
            let mut v = [[0.0; 6]; 6];
            for i in 0..3 { for j in 0..3 { v[i][j] = w[(i, j)]; } }
            for k in 0..3 { v[3 + k][3 + k] = d[k]; }
            let t = ElasticTensor::from_voigt(v, 1.0);
            let ev = t.coercivity_eigenvalues();
            prop_assume!(w.determinant() > 1e-9);
            prop_assert!(ev.iter().all(|&x| x > 0.0));
        }

        #[test]
        fn stress_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, m in proptest::array::uniform9(-1.0f64..1.0)) {
            let t = engelmann_spruce();
            let g1 = Mat3::from_row_slice(&m);
            let g2 = g1.transpose() * 0.5 + Mat3::identity();
            let n = Vec3::new(1.0, 2.0, 2.0) / 3.0;
            let lhs = t.sigma_n(&(g1 * a + g2 * b), &n);
            let rhs = t.sigma_n(&g1, &n) * a + t.sigma_n(&g2, &n) * b;
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }
}
