//! Whitney edge and face vector fields on a tetrahedral complex.
//!
//! On a tetrahedron with barycentric coordinates λ and constant gradients g,
//! the face field of the face `[a, b, c]` is
//! `W = 2(λa gb×gc + λb gc×ga + λc ga×gb)`, and the edge field of `[a, b]`
//! is `λa gb − λb ga`.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::material::ElasticTensor;
use crate::mesh::SimplicialComplex3;
use crate::{Mat3, Vec3};
use rayon::prelude::*;
use std::io::Write;

/// Coefficients of `U = Σ c_f W_f`, one per face.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceCoefficientField(pub Vec<f64>);

impl FaceCoefficientField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }
    pub fn unit(n: usize, f: usize) -> Self {
        let mut v = vec![0.0; n];
        v[f] = 1.0;
        Self(v)
    }
}

#[derive(Clone, Debug)]
struct TetData {
    grads: [Vec3; 4],
    origin: Vec3,
    jinv: Mat3,
    vol: f64,
}

pub struct WhitneyBasis<'a> {
    k: &'a SimplicialComplex3,
    tets: Vec<TetData>,
}

fn others(i: usize) -> [usize; 3] {
    match i {
        0 => [1, 2, 3],
        1 => [0, 2, 3],
        2 => [0, 1, 3],
        _ => [0, 1, 2],
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl<'a> WhitneyBasis<'a> {
    pub fn new(k: &'a SimplicialComplex3) -> Self {
        let tets = (0..k.num_tets())
            .into_par_iter()
            .map(|t| {
                let [p0, p1, p2, p3] = k.tet_points(t);
                let j = Mat3::from_columns(&[p1 - p0, p2 - p0, p3 - p0]);
                let jinv = j.try_inverse().expect("non-degenerate tet");
                let g1 = jinv.row(0).transpose();
                let g2 = jinv.row(1).transpose();
                let g3 = jinv.row(2).transpose();
                TetData { grads: [-(g1 + g2 + g3), g1, g2, g3], origin: p0, jinv, vol: j.determinant().abs() / 6.0 }
            })
            .collect();
        Self { k, tets }
    }

    pub fn complex(&self) -> &'a SimplicialComplex3 {
        self.k
    }
    pub fn num_faces(&self) -> usize {
        self.k.num_faces()
    }
    pub fn gradients(&self, t: usize) -> &[Vec3; 4] {
        &self.tets[t].grads
    }
    pub fn volume(&self, t: usize) -> f64 {
        self.tets[t].vol
    }

    pub fn lambda(&self, t: usize, x: &Vec3) -> [f64; 4] {
        let d = &self.tets[t];
        let l = d.jinv * (x - d.origin);
        [1.0 - l.x - l.y - l.z, l.x, l.y, l.z]
    }

    /// Vectors `V` with `W = Σ λ_k V_k` for the face opposite local vertex `i`.
    pub fn face_vectors(&self, t: usize, i: usize) -> [Vec3; 4] {
        let g = &self.tets[t].grads;
        let [a, b, c] = others(i);
        let mut v = [Vec3::zeros(); 4];
        v[a] = 2.0 * g[b].cross(&g[c]);
        v[b] = 2.0 * g[c].cross(&g[a]);
        v[c] = 2.0 * g[a].cross(&g[b]);
        v
    }

    /// Constant derivative `G[(α, j)] = ∂_j W^α` of a face field on `t`.
    ///
    /// On a tet the face field is `s (x − p_i) / (3 vol)` with `s` the
    /// incidence sign, so its derivative is a multiple of the identity. Using
    /// that closed form avoids the cancellation in `Σ V_k g_kᵀ` on thin tets.
    pub fn face_gradient(&self, t: usize, i: usize) -> Mat3 {
        let s = f64::from(self.k.tet_face_sign(t, i));
        Mat3::identity() * (s / (3.0 * self.tets[t].vol))
    }

    /// `Σ_k V_k g_kᵀ`, the derivative assembled from the barycentric form.
    pub fn face_gradient_expanded(&self, t: usize, i: usize) -> Mat3 {
        let v = self.face_vectors(t, i);
        let g = &self.tets[t].grads;
        (0..4).map(|k| v[k] * g[k].transpose()).sum()
    }

    pub fn face_value_local(&self, t: usize, i: usize, lam: &[f64; 4]) -> Vec3 {
        let v = self.face_vectors(t, i);
        (0..4).map(|k| v[k] * lam[k]).sum()
    }

    fn local_face(&self, f: usize, t: usize) -> usize {
        self.k.local_face(f, t).expect("face incident to tet")
    }

    /// Value of `W_f` at `x` evaluated with the affine data of tet `t`.
    pub fn eval_face_on_tet(&self, f: usize, t: usize, x: &Vec3) -> Vec3 {
        match self.k.local_face(f, t) {
            Some(i) => self.face_value_local(t, i, &self.lambda(t, x)),
            None => Vec3::zeros(),
        }
    }

    fn containing(&self, star: &[usize], x: &Vec3) -> Result<Option<usize>> {
        if let Some(&t) = star.iter().find(|&&t| self.k.contains(t, x)) {
            return Ok(Some(t));
        }
        match self.k.locate(x) {
            Some(_) => Ok(None),
            None => Err(Error::OutsidePolytope { x: x.x, y: x.y, z: x.z }),
        }
    }

    pub fn eval_face_field(&self, f: usize, x: &Vec3) -> Result<Vec3> {
        self.check_face(f)?;
        Ok(match self.containing(self.k.face_star(f), x)? {
            Some(t) => self.eval_face_on_tet(f, t, x),
            None => Vec3::zeros(),
        })
    }

    /// Local vertex indices `(a, b)` of edge `e` within tet `t`.
    fn edge_local(&self, e: usize, t: usize) -> Option<(usize, usize)> {
        let [p, q] = self.k.edges()[e];
        let tv = &self.k.tets()[t];
        let a = tv.iter().position(|&v| v == p)?;
        let b = tv.iter().position(|&v| v == q)?;
        Some((a, b))
    }

    pub fn eval_edge_on_tet(&self, e: usize, t: usize, x: &Vec3) -> Vec3 {
        match self.edge_local(e, t) {
            Some((a, b)) => {
                let l = self.lambda(t, x);
                let g = &self.tets[t].grads;
                g[b] * l[a] - g[a] * l[b]
            }
            None => Vec3::zeros(),
        }
    }

    pub fn eval_edge_field(&self, e: usize, x: &Vec3) -> Result<Vec3> {
        if e >= self.k.num_edges() {
            return Err(Error::UnknownId { kind: "edge", id: e });
        }
        Ok(match self.containing(&self.k.edge_star(e), x)? {
            Some(t) => self.eval_edge_on_tet(e, t, x),
            None => Vec3::zeros(),
        })
    }

    /// Pointwise curl of `W_e` on tet `t`: `2 ga × gb`.
    pub fn edge_curl_on_tet(&self, e: usize, t: usize) -> Vec3 {
        match self.edge_local(e, t) {
            Some((a, b)) => {
                let g = &self.tets[t].grads;
                2.0 * g[a].cross(&g[b])
            }
            None => Vec3::zeros(),
        }
    }

    /// Sparse integer coefficients `b_ef` with `curl W_e = Σ b_ef W_f`.
    pub fn curl_coefficients(&self, e: usize) -> Vec<(usize, i8)> {
        self.k.edge_faces(e).iter().map(|&f| (f, self.k.b_ef(e, f))).collect()
    }

    pub fn curl_edge_field(&self, e: usize) -> FaceCoefficientField {
        let mut c = FaceCoefficientField::zeros(self.num_faces());
        for (f, b) in self.curl_coefficients(e) {
            c.0[f] = f64::from(b);
        }
        c
    }

    /// Integer four-face sums `Σ c_f b_ft` per tet (the divergence times vol).
    pub fn divergence_sums(&self, u: &FaceCoefficientField) -> Result<Vec<f64>> {
        if u.0.len() != self.num_faces() {
            return Err(Error::LengthMismatch { expected: self.num_faces(), got: u.0.len() });
        }
        Ok((0..self.k.num_tets())
            .map(|t| {
                self.k
                    .tet_faces(t)
                    .iter()
                    .enumerate()
                    .map(|(i, &f)| u.0[f] * f64::from(self.k.tet_face_sign(t, i)))
                    .sum()
            })
            .collect())
    }

    /// Divergence of `U` on each tet (constant there), 1/m³ units per coefficient.
    pub fn divergence(&self, u: &FaceCoefficientField) -> Result<Vec<f64>> {
        let mut d = self.divergence_sums(u)?;
        for (t, v) in d.iter_mut().enumerate() {
            *v /= self.tets[t].vol;
        }
        Ok(d)
    }

    /// `∫_t λ0^a λ1^b λ2^c λ3^d dV`.
    pub fn integrate_monomial(&self, t: usize, exps: [u32; 4]) -> f64 {
        let [a, b, c, d] = exps;
        6.0 * self.tets[t].vol * factorial(a) * factorial(b) * factorial(c) * factorial(d) / factorial(a + b + c + d + 3)
    }

    /// `∫_t W_i · W_j` for the local faces of `t`.
    pub fn local_mass(&self, t: usize) -> [[f64; 4]; 4] {
        let v: [[Vec3; 4]; 4] = std::array::from_fn(|i| self.face_vectors(t, i));
        let vol = self.tets[t].vol;
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        let w = if k == l { vol / 10.0 } else { vol / 20.0 };
                        s += v[i][k].dot(&v[j][l]) * w;
                    }
                }
                m[i][j] = s;
                m[j][i] = s;
            }
        }
        m
    }

    fn common_tets(&self, f: usize, g: usize) -> Vec<usize> {
        let sg = self.k.face_star(g);
        self.k.face_star(f).iter().copied().filter(|t| sg.contains(t)).collect()
    }

    fn check_face(&self, f: usize) -> Result<()> {
        if f >= self.num_faces() {
            return Err(Error::UnknownId { kind: "face", id: f });
        }
        Ok(())
    }

    /// `∫ W_f · W_g dV`, exact.
    pub fn pair_mass(&self, f: usize, g: usize) -> Result<f64> {
        self.check_face(f)?;
        self.check_face(g)?;
        Ok(self
            .common_tets(f, g)
            .into_iter()
            .map(|t| self.local_mass(t)[self.local_face(f, t)][self.local_face(g, t)])
            .sum())
    }

    /// `−∫ ∂_i W_f^α A^{αβ}_{ij} ∂_j W_g^β dV`, exact.
    pub fn pair_stiffness(&self, f: usize, g: usize, tensor: &ElasticTensor) -> Result<f64> {
        self.check_face(f)?;
        self.check_face(g)?;
        Ok(self
            .common_tets(f, g)
            .into_iter()
            .map(|t| {
                let gf = self.face_gradient(t, self.local_face(f, t));
                let gg = self.face_gradient(t, self.local_face(g, t));
                -self.tets[t].vol * tensor.pair(&gf, &gg)
            })
            .sum())
    }

    /// Flux of `W_f` through face `g` along the right-hand normal of `g`.
    pub fn face_flux(&self, f: usize, g: usize) -> f64 {
        let Some(&t) = self.k.face_star(g).iter().find(|t| self.k.face_star(f).contains(t)) else {
            return 0.0;
        };
        let pts = self.k.face_points(g);
        let n = self.k.face_normal_raw(g) * 0.5;
        quadrature::triangle_rule()
            .iter()
            .map(|(l, w)| {
                let x = pts[0] * l[0] + pts[1] * l[1] + pts[2] * l[2];
                w * self.eval_face_on_tet(f, t, &x).dot(&n)
            })
            .sum()
    }

    /// Line integral of `W_e` along edge `e2`, from its first to its second vertex.
    pub fn edge_circulation(&self, e: usize, e2: usize) -> f64 {
        let s2 = self.k.edge_star(e2);
        let Some(t) = self.k.edge_star(e).into_iter().find(|t| s2.contains(t)) else {
            return 0.0;
        };
        let [p, q] = self.k.edges()[e2].map(|v| self.k.vertex(v));
        quadrature::segment_rule()
            .iter()
            .map(|(l, w)| {
                let x = p * l[0] + q * l[1];
                w * self.eval_edge_on_tet(e, t, &x).dot(&(q - p))
            })
            .sum()
    }

    /// `∫_f W_g dA` over a face `f` of tet `t`, for the local face `i` of `t`.
    pub fn face_integral_on(&self, t: usize, i: usize, f_local: usize) -> Vec3 {
        let v = self.face_vectors(t, i);
        let area = self.k.face_area(self.k.tet_faces(t)[f_local]);
        others(f_local).iter().map(|&k| v[k]).sum::<Vec3>() * (area / 3.0)
    }

    /// Per-tet gradients as CSV: `tet,volume,g0x,g0y,g0z,...,g3z`.
    pub fn write_gradients_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "tet,volume,g0x,g0y,g0z,g1x,g1y,g1z,g2x,g2y,g2z,g3x,g3y,g3z")?;
        for (t, d) in self.tets.iter().enumerate() {
            write!(w, "{t},{:e}", d.vol)?;
            for g in &d.grads {
                write!(w, ",{:e},{:e},{:e}", g.x, g.y, g.z)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{barycentric_subdivision, build_slab};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference() -> SimplicialComplex3 {
        SimplicialComplex3::from_tets(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
            &[[0, 1, 2, 3]],
        )
        .unwrap()
    }

    fn random_point_in(b: &WhitneyBasis, t: usize, rng: &mut ChaCha8Rng) -> Vec3 {
        let mut l: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() + 1e-3);
        let s: f64 = l.iter().sum();
        l.iter_mut().for_each(|v| *v /= s);
        let p = b.complex().tet_points(t);
        (0..4).map(|k| p[k] * l[k]).sum()
    }

    #[test]
    fn gradients_sum_to_zero() {
        let k = build_slab(2, 1, 1, 0.01, 0.005, 0.01).unwrap();
        let b = WhitneyBasis::new(&k);
        for t in 0..k.num_tets() {
            let g = b.gradients(t);
            let s: Vec3 = g.iter().sum();
            assert!(s.norm() <= 1e-12 * g[1].norm());
        }
    }

    #[test]
    fn face_flux_duality_on_reference_tet() {
        let k = reference();
        let b = WhitneyBasis::new(&k);
        for f in 0..4 {
            for g in 0..4 {
                let want = if f == g { 1.0 } else { 0.0 };
                assert!((b.face_flux(f, g) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_midpoint_value() {
        let k = reference();
        let b = WhitneyBasis::new(&k);
        for e in 0..6 {
            let [p, q] = k.edges()[e];
            let x = (k.vertex(p) + k.vertex(q)) / 2.0;
            let g = b.gradients(0);
            let want = (g[q] - g[p]) / 2.0;
            assert!((b.eval_edge_field(e, &x).unwrap() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn outside_point_errors_and_far_point_vanishes() {
        let k = build_slab(2, 1, 1, 1.0, 1.0, 1.0).unwrap();
        let b = WhitneyBasis::new(&k);
        assert!(matches!(b.eval_face_field(0, &Vec3::new(5.0, 0.5, 0.5)), Err(Error::OutsidePolytope { .. })));
        // face 0 touches the origin corner; a point in the far block is outside its star
        let v = b.eval_face_field(0, &Vec3::new(1.9, 0.5, 0.5)).unwrap();
        assert_eq!(v, Vec3::zeros());
    }

    #[test]
    fn barycenter_value_matches_average() {
        let k = reference();
        let b = WhitneyBasis::new(&k);
        let x = Vec3::repeat(0.25);
        for f in 0..4 {
            let v = b.face_vectors(0, k.local_face(f, 0).unwrap());
            let avg: Vec3 = v.iter().sum::<Vec3>() / 4.0;
            assert!((b.eval_face_field(f, &x).unwrap() - avg).norm() < 1e-13);
        }
    }

    #[test]
    fn monomials() {
        let k = reference();
        let b = WhitneyBasis::new(&k);
        let vol = 1.0 / 6.0;
        assert!((b.integrate_monomial(0, [0, 0, 0, 0]) - vol).abs() < 1e-15);
        assert!((b.integrate_monomial(0, [1, 1, 0, 0]) - vol / 20.0).abs() < 1e-15);
        assert!((b.integrate_monomial(0, [2, 0, 0, 0]) - vol / 10.0).abs() < 1e-15);
    }

    #[test]
    fn monomials_against_monte_carlo() {
        let k = reference();
        let b = WhitneyBasis::new(&k);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 400_000;
        let mut acc = [0.0; 2];
        let mut hits = 0;
        for _ in 0..n {
            let x = Vec3::new(rng.random(), rng.random(), rng.random());
            if x.sum() <= 1.0 {
                hits += 1;
                let l = b.lambda(0, &x);
                acc[0] += l[0] * l[1];
                acc[1] += l[0] * l[0];
            }
        }
        // unit cube sampling: ∫ = Σ / n
        let i11 = acc[0] / n as f64;
        let i20 = acc[1] / n as f64;
        assert!(hits > 0);
        assert!((i11 - b.integrate_monomial(0, [1, 1, 0, 0])).abs() < 1e-3);
        assert!((i20 - b.integrate_monomial(0, [2, 0, 0, 0])).abs() < 1e-3);
    }

    #[test]
    fn divergence_of_single_field() {
        let k = build_slab(1, 1, 1, 1.0, 1.0, 1.0).unwrap();
        let b = WhitneyBasis::new(&k);
        for f in 0..k.num_faces() {
            let d = b.divergence(&FaceCoefficientField::unit(k.num_faces(), f)).unwrap();
            let star = k.face_star(f);
            let mut sum = 0.0;
            for (t, &v) in d.iter().enumerate() {
                if star.contains(&t) {
                    assert!((v.abs() - 1.0 / b.volume(t)).abs() < 1e-12 / b.volume(t));
                    sum += v * b.volume(t);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
            if star.len() == 2 {
                assert!(sum.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_is_isotropic_dilatation() {
        let (k, _) = barycentric_subdivision(&build_slab(1, 1, 1, 0.01, 0.005, 0.01).unwrap()).unwrap();
        let b = WhitneyBasis::new(&k);
        for t in 0..k.num_tets() {
            for i in 0..4 {
                let exact = b.face_gradient(t, i);
                let expanded = b.face_gradient_expanded(t, i);
                assert!((exact - expanded).norm() <= 1e-10 * exact.norm());
            }
        }
    }

    #[test]
    fn divergence_theorem_pointwise() {
        // div of the affine field equals the trace of its gradient
        let k = reference();
        let b = WhitneyBasis::new(&k);
        let d = b.divergence(&FaceCoefficientField::unit(4, 2)).unwrap();
        let g = b.face_gradient(0, k.local_face(2, 0).unwrap());
        assert!((g.trace() - d[0]).abs() < 1e-12);
    }

    #[test]
    fn subdivided_tet_dualities_exhaustive() {
        let (k, _) = barycentric_subdivision(&reference()).unwrap();
        let b = WhitneyBasis::new(&k);
        for f in 0..k.num_faces() {
            for g in 0..k.num_faces() {
                let want = if f == g { 1.0 } else { 0.0 };
                assert!((b.face_flux(f, g) - want).abs() < 1e-10, "flux {f} {g}");
            }
        }
        for e in 0..k.num_edges() {
            for e2 in 0..k.num_edges() {
                let want = if e == e2 { 1.0 } else { 0.0 };
                assert!((b.edge_circulation(e, e2) - want).abs() < 1e-10, "circ {e} {e2}");
            }
        }
    }

    #[test]
    fn curl_identity_and_div_curl() {
        let (k, _) = barycentric_subdivision(&reference()).unwrap();
        let b = WhitneyBasis::new(&k);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in 0..k.num_edges() {
            let c = b.curl_edge_field(e);
            assert!(c.0.iter().all(|&v| v == 0.0 || v.abs() == 1.0));
            assert!(b.divergence_sums(&c).unwrap().iter().all(|&s| s == 0.0));
            for t in k.edge_star(e) {
                let x = random_point_in(&b, t, &mut rng);
                let lhs = b.edge_curl_on_tet(e, t);
                let rhs: Vec3 = b.curl_coefficients(e).iter().map(|&(f, s)| b.eval_face_on_tet(f, t, &x) * f64::from(s)).sum();
                assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn gradient_span() {
        let (k, _) = barycentric_subdivision(&reference()).unwrap();
        let b = WhitneyBasis::new(&k);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t = rng.random_range(0..k.num_tets());
            let x = random_point_in(&b, t, &mut rng);
            for (lp, &p) in k.tets()[t].iter().enumerate() {
                let s: Vec3 = k.vertex_edges(p).iter().map(|&e| b.eval_edge_on_tet(e, t, &x) * f64::from(k.b_pe(p, e))).sum();
                let g = b.gradients(t)[lp];
                assert!((s - g).norm() <= 1e-10 * g.norm());
            }
        }
    }

    #[test]
    fn pair_mass_matches_quadrature() {
        let k = build_slab(2, 1, 1, 0.01, 0.005, 0.01).unwrap();
        let b = WhitneyBasis::new(&k);
        for f in 0..k.num_faces() {
            for g in 0..k.num_faces() {
                let exact = b.pair_mass(f, g).unwrap();
                let mut q = 0.0;
                for &t in k.face_star(f) {
                    if !k.face_star(g).contains(&t) {
                        continue;
                    }
                    let p = k.tet_points(t);
                    for (l, w) in quadrature::tet_rule() {
                        let x: Vec3 = (0..4).map(|i| p[i] * l[i]).sum();
                        q += w * b.volume(t) * b.eval_face_on_tet(f, t, &x).dot(&b.eval_face_on_tet(g, t, &x));
                    }
                }
                assert!((exact - q).abs() <= 1e-12 * exact.abs().max(b.pair_mass(f, f).unwrap()));
                assert_eq!(exact, b.pair_mass(g, f).unwrap());
            }
            assert!(b.pair_mass(f, f).unwrap() > 0.0);
        }
    }

    #[test]
    fn pair_stiffness_against_finite_differences() {
        // regular tetrahedron, isotropic unit tensor W^{ijkl} = δ_ij δ_kl + δ_ik δ_jl + δ_il δ_jk
        let s = 1.0 / 2f64.sqrt();
        let k = SimplicialComplex3::from_tets(
            vec![[1., 0., -s], [-1., 0., -s], [0., 1., s], [0., -1., s]],
            &[[0, 1, 2, 3]],
        )
        .unwrap();
        let b = WhitneyBasis::new(&k);
        let tensor = ElasticTensor::from_four_index(
            |i, j, kk, l| {
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                d(i, j) * d(kk, l) + d(i, kk) * d(j, l) + d(i, l) * d(j, kk)
            },
            1.0,
        );
        let x0 = Vec3::new(0.0, 0.0, 0.0);
        let h = 1e-4;
        let fd = |f: usize| {
            let mut g = Mat3::zeros();
            for j in 0..3 {
                let mut dx = Vec3::zeros();
                dx[j] = h;
                let d = (b.eval_face_on_tet(f, 0, &(x0 + dx)) - b.eval_face_on_tet(f, 0, &(x0 - dx))) / (2.0 * h);
                g.set_column(j, &d);
            }
            g
        };
        for f in 0..4 {
            for g in 0..4 {
                let (gf, gg) = (fd(f), fd(g));
                let mut brute = 0.0;
                for al in 0..3 {
                    for be in 0..3 {
                        for i in 0..3 {
                            for j in 0..3 {
                                brute += tensor.w4(i, al, j, be) * gf[(al, i)] * gg[(be, j)];
                            }
                        }
                    }
                }
                let want = -b.volume(0) * brute;
                let got = b.pair_stiffness(f, g, &tensor).unwrap();
                assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{f} {g}: {got} vs {want}");
                assert!((got - b.pair_stiffness(g, f, &tensor).unwrap()).abs() <= 1e-12 * got.abs());
            }
        }
    }

    #[test]
    fn gradient_csv_has_row_per_tet() {
        let k = reference();
        let b = WhitneyBasis::new(&k);
        let mut out = Vec::new();
        b.write_gradients_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 2);
    }
}
