use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("sample index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        index: usize,
        len: usize,
        what: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown profile kind '{0}'")]
    UnknownKind(String),

    #[error("no orbit found: mismatch has no sign change on [{lo}, {hi}]")]
    NoOrbitFound { lo: f64, hi: f64 },

    #[error("truncation at R = {radius} leaves an empty domain")]
    EmptyDomain { radius: f64 },

    #[error("truncation at R = {radius} leaves {pieces} disconnected pieces")]
    DisconnectedDomain { radius: f64, pieces: usize },

    #[error("boundary condition mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("grid too small: {got} cells, need at least {need}")]
    GridTooSmall { got: usize, need: usize },

    #[error("non-positive mass entry at cell {0}")]
    NonPositiveMass(usize),

    #[error("zero function: {0}")]
    ZeroFunction(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("theta grid of {points} points too coarse for mode {k} (need {need})")]
    Aliasing { points: usize, k: usize, need: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("profile is not a shrinker: residual {residual:.3e} exceeds {tol:.1e}")]
    NotAShrinker { residual: f64, tol: f64 },

    #[error("normal graph stops being immersed at s = {s}")]
    ImmersionFailure { s: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
