use thiserror::Error;

/// Errors produced by the model, solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense oracle refused: N = {n_total} exceeds oracle scale {max}")]
    OracleScale { n_total: u32, max: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-uniform grid: step {found} differs from {expected} at row {row}")]
    NonUniformGrid { row: usize, expected: f64, found: f64 },

    #[error("too few rows: need at least {needed}, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("inconclusive peak: maximum at grid boundary (index {index})")]
    InconclusivePeak { index: usize },

    #[error("degenerate coupling: G'/delta' = 0 has no isolated critical points")]
    DegenerateCoupling,

    #[error("energy {energy} is not attainable: range is [{min}, {max}]")]
    UnattainableEnergy { energy: f64, min: f64, max: f64 },

    #[error("phase point out of bounds: jz = {jz}, phi = {phi}")]
    OutOfBounds { jz: f64, phi: f64 },

    #[error("no magic angle: f(k) has no sign change on (0, {k_max}]")]
    NoMagicAngle { k_max: f64 },

    #[error("degenerate detuning: delta = 0, ratios undefined")]
    DegenerateDetuning,

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
