use super::{NormSamples, ResonanceRun, System};
use crate::error::Result;
use crate::mesh::SimplicialComplex3;
use crate::solver::{normalize_mass, Frequency};
use std::io::Write;

/// `∫_∂Ω U·n` for `U = Σ c_f W_f` over all faces of `k`: by duality each
/// boundary face contributes its coefficient times the sign of its
/// orientation against the outward normal.
pub fn boundary_flux(c: &[f64], k: &SimplicialComplex3) -> f64 {
    k.boundary_face_ids()
        .into_iter()
        .map(|f| c[f] * f64::from(k.b_ft(f, k.face_star(f)[0])))
        .sum()
}

#[derive(Clone, Debug)]
pub struct FluxEntry {
    pub f_r: Frequency,
    /// Flux of the unit-mass-norm eigenvector.
    pub eigen_flux: f64,
    /// Flux of the unit-mass-norm resonance wave at `worst_time`.
    pub wave_flux: f64,
    /// Zero-based index into the sampled times.
    pub worst_time: usize,
}

/// Fluxes of the nearest mode and of the wave at its worst sampled time.
pub fn flux_entry(system: &System, k: &SimplicialComplex3, run: &ResonanceRun, samples: &NormSamples) -> Result<FluxEntry> {
    let pair = &run.pairs[0];
    let eigen_flux = boundary_flux(&system.expand(&pair.vector), k);
    let worst_time = samples.worst_time();
    let mut c = run.wave.coefficients(samples.times[worst_time]);
    normalize_mass(&system.mass, &mut c);
    let wave_flux = boundary_flux(&system.expand(&c), k);
    Ok(FluxEntry { f_r: pair.frequency(), eigen_flux, wave_flux, worst_time })
}

#[derive(Clone, Debug)]
pub struct FluxRow {
    pub body: String,
    pub frequency: f64,
    pub coarse: Option<FluxEntry>,
    pub fine: Option<FluxEntry>,
}

/// Which flux column a table shows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxTable {
    /// Eigenvector flux at t = 0.
    Eigen,
    /// Normalized resonance wave at the worst time.
    Wave,
}

fn cells(e: &Option<FluxEntry>, which: FluxTable) -> (String, String) {
    match e {
        None => ("-".into(), "-".into()),
        Some(e) => {
            let v = match which {
                FluxTable::Eigen => e.eigen_flux,
                FluxTable::Wave => e.wave_flux,
            };
            (e.f_r.to_string(), format!("{v:.10}"))
        }
    }
}

/// Aligned text: body, f, f_coarse, flux, f_fine, flux.
pub fn write_flux_table(w: &mut impl Write, rows: &[FluxRow], which: FluxTable) -> Result<()> {
    let what = match which {
        FluxTable::Eigen => "eigvec",
        FluxTable::Wave => "wave",
    };
    let header = ["body".to_string(), "f".into(), "f_coarse".into(), format!("flux {what} coarse"), "f_fine".into(), format!("flux {what} fine")];
    let mut table = vec![header];
    for r in rows {
        let (fc, xc) = cells(&r.coarse, which);
        let (ff, xf) = cells(&r.fine, which);
        table.push([r.body.clone(), format!("{}", r.frequency), fc, xc, ff, xf]);
    }
    let widths: Vec<usize> = (0..6).map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    for r in &table {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, &wd))| if c == 0 { format!("{s:<wd$}") } else { format!("{s:>wd$}") })
            .collect();
        writeln!(w, "{}", line.join("  ").trim_end())?;
    }
    Ok(())
}

pub fn write_flux_csv(w: &mut impl Write, rows: &[FluxRow]) -> Result<()> {
    writeln!(w, "body,f,basis,f_r,eigvec_flux,wave_flux,worst_time")?;
    for r in rows {
        for (basis, e) in [("coarse", &r.coarse), ("fine", &r.fine)] {
            if let Some(e) = e {
                let fr = match e.f_r {
                    Frequency::Hz(v) => format!("{v:.10}"),
                    Frequency::Rigid => "0".into(),
                    Frequency::Damped { .. } => "damped".into(),
                };
                writeln!(
                    w,
                    "{},{},{basis},{fr},{:.10e},{:.10e},t{}",
                    r.body,
                    r.frequency,
                    e.eigen_flux,
                    e.wave_flux,
                    e.worst_time + 1
                )?;
            }
        }
    }
    Ok(())
}
