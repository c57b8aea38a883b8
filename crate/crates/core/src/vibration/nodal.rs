use super::ResonanceWave;
use crate::error::Result;
use crate::mesh::{Body, ObservationPoint};
use crate::whitney::WhitneyBasis;
use crate::Vec3;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;

/// Linear maps from face coefficients to field values at fixed points.
/// Vertex values are averaged over the point's patch tets.
#[derive(Clone, Debug)]
pub struct FieldSampler {
    pub points: Vec<Vec3>,
    weights: Vec<Vec<(usize, Vec3)>>,
}

impl FieldSampler {
    pub fn new(basis: &WhitneyBasis, points: &[ObservationPoint]) -> Self {
        let k = basis.complex();
        let weights = points
            .par_iter()
            .map(|p| {
                let share = 1.0 / p.tets.len() as f64;
                let mut acc: BTreeMap<usize, Vec3> = BTreeMap::new();
                for &t in &p.tets {
                    let lam = basis.lambda(t, &p.x);
                    for (i, &f) in k.tet_faces(t).iter().enumerate() {
                        *acc.entry(f).or_insert_with(Vec3::zeros) += basis.face_value_local(t, i, &lam) * share;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        Self { points: points.iter().map(|p| p.x).collect(), weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Field values at every point for face coefficients `c`.
    pub fn eval(&self, c: &[f64]) -> Vec<Vec3> {
        self.weights.par_iter().map(|w| w.iter().map(|&(f, v)| v * c[f]).sum()).collect()
    }
}

/// Norms `|w(x_i, t_j)|` with the per-time extremes.
#[derive(Clone, Debug)]
pub struct NormSamples {
    pub times: Vec<f64>,
    /// `norms[j][i]`: time `j`, point `i`.
    pub norms: Vec<Vec<f64>>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    /// `(max − min) / 10`.
    pub delta: Vec<f64>,
}

/// `t_j = j·2π/(10ω)`, `j = 1..10`: one period of the drive.
pub fn default_times(omega: f64) -> Vec<f64> {
    (1..=10).map(|j| j as f64 * 2.0 * std::f64::consts::PI / (10.0 * omega)).collect()
}

pub fn sample_norms(wave: &ResonanceWave, sampler: &FieldSampler, times: &[f64]) -> NormSamples {
    // the wave is a₁(t) U₁ + a₂(t) U₂ for two fixed fields
    let u1 = sampler.eval(&wave.full1);
    let u2 = sampler.eval(&wave.full2);
    let norms: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let (a1, a2) = wave.time_factors(t);
            u1.iter().zip(&u2).map(|(x, y)| (x * a1 + y * a2).norm()).collect()
        })
        .collect();
    NormSamples::from_norms(times.to_vec(), norms)
}

impl NormSamples {
    pub fn from_norms(times: Vec<f64>, norms: Vec<Vec<f64>>) -> Self {
        let max: Vec<f64> = norms.iter().map(|n| n.iter().copied().fold(0.0, f64::max)).collect();
        let min: Vec<f64> =
            norms.iter().map(|n| if n.is_empty() { 0.0 } else { n.iter().copied().fold(f64::INFINITY, f64::min) }).collect();
        let delta = max.iter().zip(&min).map(|(a, b)| (a - b) / 10.0).collect();
        Self { times, norms, max, min, delta }
    }

    pub fn num_points(&self) -> usize {
        self.norms.first().map_or(0, Vec::len)
    }

    /// Index of the time with the largest `max/min` ratio (first on ties);
    /// a zero minimum with a positive maximum counts as infinite.
    pub fn worst_time(&self) -> usize {
        let ratio = |j: usize| {
            if self.max[j] == 0.0 {
                0.0
            } else if self.min[j] == 0.0 {
                f64::INFINITY
            } else {
                self.max[j] / self.min[j]
            }
        };
        (0..self.times.len()).fold(0, |best, j| if ratio(j) > ratio(best) { j } else { best })
    }
}

#[derive(Clone, Debug)]
pub struct NodalReport {
    pub c_omega: f64,
    pub times: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    pub delta: Vec<f64>,
    /// Nodal at every sampled time.
    pub nodal: Vec<bool>,
}

impl NodalReport {
    pub fn count(&self) -> usize {
        self.nodal.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.nodal.len()).filter(|&i| self.nodal[i]).collect()
    }

    /// Every nodal point here is also nodal in `other`.
    pub fn is_subset_of(&self, other: &NodalReport) -> bool {
        self.nodal.len() == other.nodal.len() && self.nodal.iter().zip(&other.nodal).all(|(&a, &b)| !a || b)
    }
}

/// A point is nodal at `t_j` when its norm is at most `min + c_Ω δ`, and
/// nodal when that holds at every `t_j`.
pub fn nodal_points(samples: &NormSamples, c_omega: f64) -> NodalReport {
    let n = samples.num_points();
    let mut nodal = vec![true; n];
    for (j, norms) in samples.norms.iter().enumerate() {
        let cut = samples.min[j] + c_omega * samples.delta[j];
        for (flag, &v) in nodal.iter_mut().zip(norms) {
            *flag &= v <= cut;
        }
    }
    NodalReport {
        c_omega,
        times: samples.times.clone(),
        max: samples.max.clone(),
        min: samples.min.clone(),
        delta: samples.delta.clone(),
        nodal,
    }
}

/// One row per point: coordinates in cm, the nodal flag, and the norm at each
/// time divided by that time's maximum (so the file does not depend on the
/// forcing amplitude).
pub fn write_nodal_csv(w: &mut impl Write, points: &[Vec3], samples: &NormSamples, report: &NodalReport) -> Result<()> {
    write!(w, "x_cm,y_cm,z_cm,nodal")?;
    for j in 1..=samples.times.len() {
        write!(w, ",t{j}")?;
    }
    writeln!(w)?;
    for (i, p) in points.iter().enumerate() {
        write!(w, "{:.6},{:.6},{:.6},{}", p.x * 100.0, p.y * 100.0, p.z * 100.0, u8::from(report.nodal[i]))?;
        for (j, n) in samples.norms.iter().enumerate() {
            let v = if samples.max[j] > 0.0 { n[i] / samples.max[j] } else { 0.0 };
            write!(w, ",{v:.9e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Nodal points over the outline of the selected coarse boundary faces,
/// projected onto the two coordinate axes most nearly parallel to the side.
pub fn write_chladni_svg(
    w: &mut impl Write,
    body: &Body,
    side: &[usize],
    points: &[Vec3],
    report: &NodalReport,
    title: &str,
) -> Result<()> {
    let k = &body.coarse;
    let normal: Vec3 = side.iter().map(|&f| body.frames.iter().find(|fr| fr.coarse_face == f).map_or(Vec3::zeros(), |fr| fr.normal)).sum();
    let drop = normal.iamax();
    let (a, b) = match drop {
        0 => (2, 1),
        1 => (0, 2),
        _ => (0, 1),
    };

    // outline: edges of the patch used by exactly one selected face
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for &f in side {
        for &e in k.face_edges(f) {
            *count.entry(e).or_default() += 1;
        }
    }
    let outline: Vec<(Vec3, Vec3)> = count
        .into_iter()
        .filter(|&(_, c)| c == 1)
        .map(|(e, _)| {
            let [p, q] = k.edges()[e];
            (k.vertex(p), k.vertex(q))
        })
        .collect();

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in outline.iter().flat_map(|(p, q)| [p, q]).chain(points) {
        for (d, ax) in [a, b].into_iter().enumerate() {
            lo[d] = lo[d].min(p[ax]);
            hi[d] = hi[d].max(p[ax]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let size = 600.0;
    let margin = 20.0;
    let s = size / span;
    let (wd, ht) = ((hi[0] - lo[0]) * s + 2.0 * margin, (hi[1] - lo[1]) * s + 2.0 * margin + 20.0);
    let xy = |p: &Vec3| (margin + (p[a] - lo[0]) * s, margin + 20.0 + (hi[1] - p[b]) * s);

    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{wd:.1}" height="{ht:.1}" viewBox="0 0 {wd:.1} {ht:.1}">"#)?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        w,
        r#"<text x="{margin}" y="15" font-family="sans-serif" font-size="12">{} (c_Ω = {}, {} of {} points nodal)</text>"#,
        escape(title),
        report.c_omega,
        report.count(),
        points.len()
    )?;
    writeln!(w, r##"<g stroke="#888" stroke-width="1" fill="none">"##)?;
    for (p, q) in &outline {
        let (x1, y1) = xy(p);
        let (x2, y2) = xy(q);
        writeln!(w, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#)?;
    }
    writeln!(w, "</g>")?;
    writeln!(w, r#"<g fill="black">"#)?;
    for i in report.indices() {
        let (x, y) = xy(&points[i]);
        writeln!(w, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5"/>"#)?;
    }
    writeln!(w, "</g>\n</svg>")?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
