use thiserror::Error;

pub type Result<T> = std::result::Result<T, WaveError>;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("coefficients are not Hermitian symmetric (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("iteration diverged at iterate {iterate}: non-finite values")]
    Divergence { iterate: usize },

    #[error("iteration did not converge within {iterations} iterates")]
    NotConverged { iterations: usize },

    #[error("time {t} lies beyond the validity horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("time step {dt} violates the CFL bound {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("profile support radius {radius} does not fit in the box (limit {limit})")]
    Support { radius: f64, limit: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("equation is not radial: {witness}")]
    NotRadial { witness: String },

    #[error("refused by admissibility gate: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl WaveError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        WaveError::InvalidArgument(msg.into())
    }
}
