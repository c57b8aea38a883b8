use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mesh mask is disconnected ({components} components); the body must be connected")]
    DisconnectedMask { components: usize },

    #[error("degenerate tetrahedron {tet} (signed volume {volume:e})")]
    DegenerateTet { tet: usize, volume: f64 },

    #[error("face {face} is shared by {count} tetrahedra; expected 1 or 2")]
    NonManifold { face: usize, count: usize },

    #[error("interior face {face} is not oppositely oriented by its two tetrahedra")]
    InconsistentOrientation { face: usize },

    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: usize },

    #[error("incidence requires dim(b) = dim(a) + 1, got dims {a} and {b}")]
    DimensionMismatch { a: u8, b: u8 },

    #[error("point ({x}, {y}, {z}) lies outside the polytope")]
    OutsidePolytope { x: f64, y: f64, z: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("compliance block is singular; material is not coercive")]
    SingularCompliance,

    #[error("shifted matrix is singular at sigma = {shift:e}; perturb the shift")]
    SingularShift { shift: f64 },

    #[error("drive frequency is within 1e-6 of an eigenfrequency (gap {gap:e}); detune the drive")]
    NearResonance { gap: f64 },

    #[error("eigensolver did not converge after {restarts} restarts; Ritz residuals {residuals:?}")]
    NoConvergence { restarts: usize, residuals: Vec<f64> },

    #[error("mode with eigenvalue {eigenvalue:e} is not an undamped vibration mode")]
    DampedMode { eigenvalue: f64 },

    #[error("observation selector matches no boundary faces")]
    EmptySelection,

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DisconnectedMask { .. } => "disconnected-mask",
            Error::DegenerateTet { .. } => "degenerate-tet",
            Error::NonManifold { .. } => "non-manifold",
            Error::InconsistentOrientation { .. } => "inconsistent-orientation",
            Error::UnknownId { .. } => "unknown-id",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::OutsidePolytope { .. } => "outside-polytope",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::SingularCompliance => "singular-compliance",
            Error::SingularShift { .. } => "singular-shift",
            Error::NearResonance { .. } => "near-resonance",
            Error::NoConvergence { .. } => "no-convergence",
            Error::DampedMode { .. } => "damped-mode",
            Error::EmptySelection => "empty-selection",
            Error::Factorization(_) => "factorization",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
