use crate::args::*;
use anyhow::{Context, Result};
use chladni::assembly::{
    assemble_boundary_constraints, assemble_mass, assemble_stiffness, boundary_block_violations,
    lower_right_offdiag_max, ForcingWave,
};
use chladni::material::{load_material, ElasticTensor};
use chladni::mesh::{write_mesh, Body};
use chladni::solver::{eigs_near_with, factorize_shifted, shift_for, LanczosOptions};
use chladni::sparse::CsrMatrix;
use chladni::vibration::*;
use chladni::whitney::WhitneyBasis;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct Ctx {
    pub out: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let p = self.path(name);
        let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        Ok(BufWriter::new(f))
    }

    fn write_matrix(&self, name: &str, m: &CsrMatrix) -> Result<()> {
        let mut w = self.create(name)?;
        m.write_matrix_market(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn hz(f: f64) -> String {
    format!("{f}")
}

fn load(body: &BodyArgs, material: &MaterialArgs) -> Result<(Body, ElasticTensor)> {
    let tensor = load_material(&material.material)?;
    let coarse = body.build()?;
    Ok((Body::new(body.name.clone(), coarse)?, tensor))
}

fn systems(body: &Body, basis: &WhitneyBasis, tensor: &ElasticTensor, choice: BasisChoice) -> Result<Vec<System>> {
    let m = assemble_mass(basis, tensor.rho);
    let k = assemble_stiffness(body, basis, tensor);
    let mut out = Vec::new();
    if choice != BasisChoice::Fine {
        out.push(System::coarse(m.clone(), k.clone()));
    }
    if choice != BasisChoice::Coarse {
        let cm = assemble_boundary_constraints(body, basis, tensor)?;
        out.push(System::fine(&m, &k, cm));
    }
    Ok(out)
}

pub fn mesh(ctx: &Ctx, a: &BodyArgs) -> Result<()> {
    a.validate()?;
    let body = Body::new(a.name.clone(), a.build()?)?;
    write_mesh(&body.coarse, &ctx.path(&format!("{}_K.json", a.name)))?;
    write_mesh(&body.fine, &ctx.path(&format!("{}_Kprime.json", a.name)))?;
    let text = format!("K  {}\nK' {}\n", body.coarse.census(), body.fine.census());
    std::fs::write(ctx.path(&format!("{}_census.txt", a.name)), &text)?;
    print!("{text}");
    Ok(())
}

pub fn assemble(ctx: &Ctx, a: &AssembleArgs) -> Result<()> {
    a.body.validate()?;
    let (body, tensor) = load(&a.body, &a.material)?;
    let basis = WhitneyBasis::new(&body.fine);
    let m = assemble_mass(&basis, tensor.rho);
    let k = assemble_stiffness(&body, &basis, &tensor);
    let cm = assemble_boundary_constraints(&body, &basis, &tensor)?;
    let name = &a.body.name;
    ctx.write_matrix(&format!("{name}_mass.mtx"), &m)?;
    ctx.write_matrix(&format!("{name}_stiffness.mtx"), &k)?;
    ctx.write_matrix(&format!("{name}_constraints.mtx"), &cm.c)?;
    let fine = System::fine(&m, &k, cm);
    ctx.write_matrix(&format!("{name}_fine_mass.mtx"), &fine.mass)?;
    ctx.write_matrix(&format!("{name}_fine_stiffness.mtx"), &fine.stiffness)?;
    let cm = fine.constraints.as_ref().expect("fine system carries constraints");

    let [r2, r1, r0] = cm.rank_census();
    let (structural, numeric) = boundary_block_violations(&k, |f| body.fine.is_boundary_face(f));
    let mut s = String::new();
    use std::fmt::Write as _;
    writeln!(s, "boundary subsystems      {}", cm.subsystems.len())?;
    writeln!(s, "rank 2 / rank 1 / rank 0 {r2} / {r1} / {r0}   (reference rank-one count: 11)")?;
    writeln!(s, "null rows r_n            {}", cm.r_n)?;
    writeln!(s, "dependent faces          {}", cm.dependent.len())?;
    writeln!(s, "dim Div(K)               {}", cm.n_faces)?;
    writeln!(s, "dim Div^b(K)             {}", cm.dim_div_b())?;
    writeln!(s, "symmetry I               {:.3e}", m.symmetry_residual())?;
    writeln!(s, "symmetry K               {:.3e}", k.symmetry_residual())?;
    writeln!(s, "symmetry I reduced       {:.3e}", fine.mass.symmetry_residual())?;
    writeln!(s, "symmetry K reduced       {:.3e}", fine.stiffness.symmetry_residual())?;
    writeln!(s, "boundary-boundary offdiag {structural} structural, {numeric} nonzero")?;
    writeln!(s, "reduced lower-right offdiag per row (max) {}", lower_right_offdiag_max(&fine.stiffness, cm.interior.len()))?;
    std::fs::write(ctx.path(&format!("{name}_assembly.txt")), &s)?;
    print!("{s}");
    Ok(())
}

pub fn eigs(ctx: &Ctx, a: &EigsArgs) -> Result<()> {
    a.body.validate()?;
    a.solve.validate()?;
    validate_modes(a.modes)?;
    let (body, tensor) = load(&a.body, &a.material)?;
    let basis = WhitneyBasis::new(&body.fine);
    let name = &a.body.name;
    let opts = LanczosOptions { seed: a.solve.seed, ..Default::default() };
    let mut table = vec![["basis", "f", "mode", "f_r", "eigenvalue", "residual", "flux"].map(String::from)];
    for sys in systems(&body, &basis, &tensor, a.solve.basis)? {
        for &f in &a.solve.frequencies {
            let stem = format!("{name}_{}_{}Hz", sys.kind, hz(f));
            let fac = factorize_shifted(&sys.stiffness, &sys.mass, shift_for(f))?;
            if a.dump_shifted {
                let mut w = ctx.create(&format!("{stem}_shifted.mtx"))?;
                fac.write_matrix_market(&mut w)?;
                w.flush()?;
            }
            let sol = eigs_near_with(&fac, &sys.stiffness, &sys.mass, a.modes, &opts)?;
            std::fs::write(ctx.path(&format!("{stem}_lanczos.log")), sol.log.join("\n") + "\n")?;
            let mut w = ctx.create(&format!("{stem}_eigvec.csv"))?;
            let vecs: Vec<Vec<f64>> = sol.pairs.iter().map(|p| sys.expand(&p.vector)).collect();
            write!(w, "face")?;
            for j in 1..=vecs.len() {
                write!(w, ",c{j}")?;
            }
            writeln!(w)?;
            for i in 0..body.fine.num_faces() {
                write!(w, "{i}")?;
                for v in &vecs {
                    write!(w, ",{:.12e}", v[i])?;
                }
                writeln!(w)?;
            }
            w.flush()?;
            for (j, (p, v)) in sol.pairs.iter().zip(&vecs).enumerate() {
                table.push([
                    sys.kind.to_string(),
                    hz(f),
                    (j + 1).to_string(),
                    p.frequency().to_string(),
                    format!("{:.10e}", p.eigenvalue),
                    format!("{:.3e}", p.residual),
                    format!("{:.10}", boundary_flux(v, &body.fine)),
                ]);
            }
        }
    }
    let text = align(&table);
    std::fs::write(ctx.path(&format!("{name}_eigs.txt")), &text)?;
    let csv: String = table.iter().map(|r| r.join(",") + "\n").collect();
    std::fs::write(ctx.path(&format!("{name}_eigs.csv")), csv)?;
    print!("{text}");
    Ok(())
}

fn align<const N: usize>(rows: &[[String; N]]) -> String {
    let widths: Vec<usize> = (0..N).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    rows.iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(s, &w)| format!("{s:>w$}")).collect();
            cells.join("  ") + "\n"
        })
        .collect()
}

fn forcing(body: &Body, w: &WaveArgs, f: f64) -> Result<ForcingWave> {
    let wave = ForcingWave::toward(&body.fine, w.direction()?, f, w.distance_cm / 100.0, w.sign.into())?;
    Ok(wave.scaled(w.amplitude))
}

fn c_tag(c: f64) -> String {
    format!("{c}")
}

pub fn resonate(ctx: &Ctx, a: &ResonateArgs) -> Result<()> {
    a.body.validate()?;
    a.solve.validate()?;
    a.wave.validate()?;
    validate_modes(a.modes)?;
    validate_comega(&a.comega)?;
    let (body, tensor) = load(&a.body, &a.material)?;
    let basis = WhitneyBasis::new(&body.fine);
    let side = body.select_side(a.wave.direction()?, a.wave.side_cos);
    let pts = body.observation_points(&side)?;
    let sampler = FieldSampler::new(&basis, &pts);
    let name = &a.body.name;
    let opts = LanczosOptions { seed: a.solve.seed, ..Default::default() };
    let modes_tag = if a.modes > 1 { format!("_modes{}", a.modes) } else { String::new() };
    let mut rows: Vec<FluxRow> =
        a.solve.frequencies.iter().map(|&f| FluxRow { body: name.clone(), frequency: f, coarse: None, fine: None }).collect();
    for sys in systems(&body, &basis, &tensor, a.solve.basis)? {
        for (row, &f) in rows.iter_mut().zip(&a.solve.frequencies) {
            let wave = forcing(&body, &a.wave, f)?;
            let run = chladni::vibration::resonate(&sys, &basis, &wave, a.modes, &opts)?;
            let samples = sample_norms(&run.wave, &sampler, &default_times(run.wave.omega));
            let stem = format!("{name}_{}_{}Hz{modes_tag}", sys.kind, hz(f));
            let mut counts = Vec::new();
            for &c in &a.comega {
                let report = nodal_points(&samples, c);
                let mut w = ctx.create(&format!("{stem}_c{}_nodal.csv", c_tag(c)))?;
                write_nodal_csv(&mut w, &sampler.points, &samples, &report)?;
                w.flush()?;
                let mut w = ctx.create(&format!("{stem}_c{}_chladni.svg", c_tag(c)))?;
                let title = format!("{name} {} {} Hz, f_r = {}", sys.kind, hz(f), run.pairs[0].frequency());
                write_chladni_svg(&mut w, &body, &side, &sampler.points, &report, &title)?;
                w.flush()?;
                counts.push(format!("c={}:{}", c_tag(c), report.count()));
            }
            let entry = flux_entry(&sys, &body.fine, &run, &samples)?;
            println!(
                "{} f={} f_r={} points={} nodal {} worst=t{}",
                sys.kind,
                hz(f),
                entry.f_r,
                sampler.len(),
                counts.join(" "),
                entry.worst_time + 1
            );
            match sys.kind {
                BasisKind::Coarse => row.coarse = Some(entry),
                BasisKind::Fine => row.fine = Some(entry),
            }
        }
    }
    let mut w = ctx.create(&format!("{name}{modes_tag}_resonance_flux.txt"))?;
    write_flux_table(&mut w, &rows, FluxTable::Wave)?;
    w.flush()?;
    Ok(())
}

pub fn flux(ctx: &Ctx, a: &FluxArgs) -> Result<()> {
    a.body.validate()?;
    a.solve.validate()?;
    a.wave.validate()?;
    let (body, tensor) = load(&a.body, &a.material)?;
    let basis = WhitneyBasis::new(&body.fine);
    let side = body.select_side(a.wave.direction()?, a.wave.side_cos);
    let sampler = FieldSampler::new(&basis, &body.observation_points(&side)?);
    let name = &a.body.name;
    let opts = LanczosOptions { seed: a.solve.seed, ..Default::default() };
    let mut rows: Vec<FluxRow> =
        a.solve.frequencies.iter().map(|&f| FluxRow { body: name.clone(), frequency: f, coarse: None, fine: None }).collect();
    for sys in systems(&body, &basis, &tensor, a.solve.basis)? {
        for (row, &f) in rows.iter_mut().zip(&a.solve.frequencies) {
            let run = chladni::vibration::resonate(&sys, &basis, &forcing(&body, &a.wave, f)?, 1, &opts)?;
            let samples = sample_norms(&run.wave, &sampler, &default_times(run.wave.omega));
            let entry = flux_entry(&sys, &body.fine, &run, &samples)?;
            match sys.kind {
                BasisKind::Coarse => row.coarse = Some(entry),
                BasisKind::Fine => row.fine = Some(entry),
            }
        }
    }
    let mut text = Vec::new();
    writeln!(text, "Initial fluxes of the normalized eigenvectors")?;
    write_flux_table(&mut text, &rows, FluxTable::Eigen)?;
    writeln!(text, "\nFluxes of the normalized resonance waves at the worst sampled time")?;
    write_flux_table(&mut text, &rows, FluxTable::Wave)?;
    std::fs::write(ctx.path(&format!("{name}_flux.txt")), &text)?;
    let mut csv = ctx.create(&format!("{name}_flux.csv"))?;
    write_flux_csv(&mut csv, &rows)?;
    csv.flush()?;
    std::io::stdout().write_all(&text)?;
    Ok(())
}

pub fn ensure_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).with_context(|| format!("creating output directory {}", p.display()))
}
