use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the crate. The CLI maps each variant onto an exit
/// code through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error at row {row}, column '{column}': {reason}")]
    Data { row: usize, column: String, reason: String },

    #[error("data error: {0}")]
    InvalidData(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate residuals: sample variance is zero")]
    DegenerateResiduals,

    #[error("rank-deficient design matrix in least-squares fit")]
    RankDeficient,

    #[error("isolated point {index}: kernel weight sum {weight:e} is below 1e-300")]
    IsolatedPoint { index: usize, weight: f64 },

    #[error("variance family '{family}' produced a non-finite value")]
    FamilyEvaluation { family: String },

    #[error("calibration error: {failures} of {total} bootstrap replicates failed")]
    Calibration { failures: usize, total: usize },

    #[error("scenario error: test '{test}' failed on {failures} of {reps} replications")]
    Scenario { test: String, failures: usize, reps: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Calibration { .. } | Error::Scenario { .. } => 4,
            _ => 3,
        }
    }
}
