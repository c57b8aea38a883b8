//! Quadrature rules in barycentric coordinates, weights summing to one.

use std::sync::OnceLock;

const GL4_X: [f64; 4] = [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526];
const GL4_W: [f64; 4] = [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];

/// Collapsed-coordinate product rule on the tetrahedron (64 points); exact
/// for polynomials of total degree 5.
pub fn tet_rule() -> &'static [([f64; 4], f64)] {
    static RULE: OnceLock<Vec<([f64; 4], f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut out = Vec::with_capacity(64);
        for (&xu, &wu) in GL4_X.iter().zip(&GL4_W) {
            let u = 0.5 * (1.0 + xu);
            for (&xv, &wv) in GL4_X.iter().zip(&GL4_W) {
                let v = 0.5 * (1.0 + xv);
                for (&xw, &ww) in GL4_X.iter().zip(&GL4_W) {
                    let w = 0.5 * (1.0 + xw);
                    let x = u;
                    let y = v * (1.0 - u);
                    let z = w * (1.0 - u) * (1.0 - v);
                    // reference volume 1/6, so scale by 6
                    let weight = 6.0 * 0.125 * wu * wv * ww * (1.0 - u) * (1.0 - u) * (1.0 - v);
                    out.push(([1.0 - x - y - z, x, y, z], weight));
                }
            }
        }
        out
    })
}

/// Edge-midpoint rule on the triangle; exact for quadratics.
pub fn triangle_rule() -> [([f64; 3], f64); 3] {
    let t = 1.0 / 3.0;
    [([0.5, 0.5, 0.0], t), ([0.0, 0.5, 0.5], t), ([0.5, 0.0, 0.5], t)]
}

/// Two-point Gauss rule on a segment; exact for cubics.
pub fn segment_rule() -> [([f64; 2], f64); 2] {
    let a = 0.5 - 0.5 / 3f64.sqrt();
    [([1.0 - a, a], 0.5), ([a, 1.0 - a], 0.5)]
}
