use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("local dimension must be at least 2, got {0}")]
    BadDimension(u32),

    #[error("amplitude vector has length {got}, expected {dim}^{sites}")]
    ShapeMismatch { dim: u32, sites: usize, got: usize },

    #[error("state space {dim}^{sites} exceeds the supported capacity")]
    Capacity { dim: u32, sites: usize },

    #[error("site index {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("state norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("{op} requires {requirement}, got D = {dim}")]
    UnsupportedDimension {
        op: &'static str,
        requirement: &'static str,
        dim: u32,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cost spectrum still degenerate after {attempts} bias redraws (instance seed {seed})")]
    DegenerateCost { attempts: u32, seed: u64 },

    #[error("eigensolver stalled at residual {achieved:.3e} (target {target:.1e}){context}")]
    Eigensolver {
        target: f64,
        achieved: f64,
        context: String,
    },

    #[error("collapse objective is degenerate: rescaled depth curves do not overlap")]
    DegenerateObjective,

    #[error("{what} exceeded its numerical tolerance: {value:.3e} > {limit:.1e}")]
    ResidualTooLarge {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{failed} of {total} batch tasks failed")]
    BatchFailed { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },

    #[error("{path}: {message}")]
    Config { path: String, message: String },
}

impl Error {
    /// Process exit code for command-line use: 2 for validation and input
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadDimension(_)
            | Error::ShapeMismatch { .. }
            | Error::Capacity { .. }
            | Error::SiteOutOfRange { .. }
            | Error::NonUnitary { .. }
            | Error::NotNormalized { .. }
            | Error::UnsupportedDimension { .. }
            | Error::Invalid(_)
            | Error::Io(_)
            | Error::Json { .. }
            | Error::Csv { .. }
            | Error::Config { .. } => 2,
            Error::DegenerateCost { .. }
            | Error::Eigensolver { .. }
            | Error::DegenerateObjective
            | Error::ResidualTooLarge { .. }
            | Error::NonFinite(_)
            | Error::BatchFailed { .. } => 3,
        }
    }
}
