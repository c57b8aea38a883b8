use anyhow::{bail, Context, Result};
use chladni::assembly::WaveSign;
use chladni::mesh::{build_heightfield_plate, build_slab, read_mesh, HeightField, SimplicialComplex3};
use chladni::Vec3;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "chladni", version, about = "Vibration modes, resonance waves and Chladni patterns of thin orthotropic plates")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "CHLADNI_OUT", default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build K and its barycentric subdivision; write meshes and census.
    Mesh(BodyArgs),
    /// Assemble mass, stiffness and traction constraints; write Matrix Market files.
    Assemble(AssembleArgs),
    /// Eigenpairs nearest −(2πf)² for each frequency.
    Eigs(EigsArgs),
    /// Forced resonance waves, nodal points and Chladni plots.
    Resonate(ResonateArgs),
    /// Eigenvector and resonance-wave flux tables for both bases.
    Flux(FluxArgs),
}

#[derive(Args, Debug, Clone)]
pub struct BodyArgs {
    /// Slab blocks along x, y (thickness) and z.
    #[arg(long, default_value = "10x2x20", conflicts_with_all = ["heightfield", "mesh"])]
    pub slab: String,

    /// Block size in cm along x, y and z.
    #[arg(long, default_value = "1x0.5x1")]
    pub cell: String,

    /// Plate described by a height-field JSON file (lengths in cm).
    #[arg(long)]
    pub heightfield: Option<PathBuf>,

    /// Coarse mesh JSON as written by `mesh` (metres).
    #[arg(long)]
    pub mesh: Option<PathBuf>,

    /// Name used as the output file prefix.
    #[arg(long, default_value = "slab")]
    pub name: String,
}

#[derive(Args, Debug, Clone)]
pub struct MaterialArgs {
    /// Preset name or material JSON file.
    #[arg(long, default_value = "engelmann-spruce")]
    pub material: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisChoice {
    Coarse,
    Fine,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignChoice {
    Minus,
    Plus,
}

impl From<SignChoice> for WaveSign {
    fn from(s: SignChoice) -> Self {
        match s {
            SignChoice::Minus => WaveSign::Minus,
            SignChoice::Plus => WaveSign::Plus,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Drive frequencies in Hz.
    #[arg(long = "freq", value_delimiter = ',', default_value = "80,147,222,304,349")]
    pub frequencies: Vec<f64>,

    #[arg(long, value_enum, default_value = "both")]
    pub basis: BasisChoice,

    /// Lanczos start-vector seed.
    #[arg(long, default_value_t = chladni::solver::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct WaveArgs {
    /// Propagation direction of the external wave.
    #[arg(long, default_value = "0,1,0", allow_hyphen_values = true)]
    pub direction: String,

    /// Distance of the source in front of the body, cm.
    #[arg(long = "distance", default_value_t = 62.0)]
    pub distance_cm: f64,

    /// Amplitude of the force density.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,

    #[arg(long, value_enum, default_value = "minus")]
    pub sign: SignChoice,

    /// Observation side: boundary faces with N·d ≥ this cosine.
    #[arg(long, default_value_t = 0.5)]
    pub side_cos: f64,
}

#[derive(Args, Debug)]
pub struct AssembleArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
}

#[derive(Args, Debug)]
pub struct EigsArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Eigenpairs per frequency.
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
    /// Also write K − σM for each shift.
    #[arg(long)]
    pub dump_shifted: bool,
}

#[derive(Args, Debug)]
pub struct ResonateArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Modes nearest the drive that contribute to the wave.
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
    /// Nodal thresholds c_Ω.
    #[arg(long, value_delimiter = ',', default_value = "0.8")]
    pub comega: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct FluxArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
}

fn parse_triple(s: &str, sep: char, what: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(sep).map(str::trim).collect();
    if parts.len() != 3 {
        bail!("{what} must have three components separated by '{sep}', got '{s}'");
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().with_context(|| format!("{what}: '{p}' is not a number"))?;
    }
    Ok(out)
}

/// Height field on disk, lengths in cm.
#[derive(Deserialize)]
struct HeightFieldFile {
    nx: usize,
    nz: usize,
    cell_cm: f64,
    #[serde(default = "one")]
    layers: usize,
    thickness_cm: Vec<f64>,
    #[serde(default)]
    elevation_cm: Option<Vec<f64>>,
    #[serde(default)]
    mask: Option<Vec<bool>>,
}

fn one() -> usize {
    1
}

impl BodyArgs {
    pub fn validate(&self) -> Result<()> {
        if self.heightfield.is_none() && self.mesh.is_none() {
            let n = parse_triple(&self.slab, 'x', "--slab")?;
            if n.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
                bail!("--slab block counts must be positive integers");
            }
            let c = parse_triple(&self.cell, 'x', "--cell")?;
            if c.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                bail!("--cell sizes must be positive");
            }
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("--name must be a non-empty file-name prefix");
        }
        Ok(())
    }

    pub fn build(&self) -> Result<SimplicialComplex3> {
        if let Some(p) = &self.mesh {
            return Ok(read_mesh(p)?);
        }
        if let Some(p) = &self.heightfield {
            return read_heightfield(p);
        }
        let n = parse_triple(&self.slab, 'x', "--slab")?;
        let c = parse_triple(&self.cell, 'x', "--cell")?;
        Ok(build_slab(n[0] as usize, n[1] as usize, n[2] as usize, c[0] / 100.0, c[1] / 100.0, c[2] / 100.0)?)
    }
}

fn read_heightfield(p: &Path) -> Result<SimplicialComplex3> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    let f: HeightFieldFile = serde_json::from_str(&text).map_err(chladni::Error::from)?;
    let n = f.nx * f.nz;
    let h = HeightField {
        nx: f.nx,
        nz: f.nz,
        mask: f.mask.unwrap_or_else(|| vec![true; n]),
        thickness: f.thickness_cm.iter().map(|v| v / 100.0).collect(),
        elevation: f.elevation_cm.map_or_else(|| vec![0.0; n], |e| e.iter().map(|v| v / 100.0).collect()),
        cell: f.cell_cm / 100.0,
        layers: f.layers,
    };
    Ok(build_heightfield_plate(&h)?)
}

impl SolveArgs {
    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() || self.frequencies.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            bail!("frequencies must be positive");
        }
        Ok(())
    }
}

impl WaveArgs {
    pub fn validate(&self) -> Result<()> {
        let d = self.direction()?;
        if !(d.norm() > 0.0) {
            bail!("--direction must be nonzero");
        }
        if !(self.distance_cm >= 0.0) || !self.amplitude.is_finite() || !(self.side_cos.abs() <= 1.0) {
            bail!("--distance must be non-negative, --amplitude finite and --side-cos in [-1, 1]");
        }
        Ok(())
    }

    pub fn direction(&self) -> Result<Vec3> {
        let d = parse_triple(&self.direction, ',', "--direction")?;
        Ok(Vec3::new(d[0], d[1], d[2]))
    }
}

pub fn validate_modes(modes: usize) -> Result<()> {
    if modes == 0 {
        bail!("--modes must be at least 1");
    }
    Ok(())
}

pub fn validate_comega(c: &[f64]) -> Result<()> {
    if c.is_empty() || c.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        bail!("--comega values must be positive");
    }
    Ok(())
}
