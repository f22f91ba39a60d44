use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context}")]
    Dimension { context: String },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not symmetric (relative asymmetry {rel:.3e})")]
    Asymmetric { rel: f64 },

    #[error("rank {r} out of bounds for size {n}")]
    Rank { r: usize, n: usize },

    #[error("cannot draw {m} samples from a population of {n}")]
    SampleSize { m: usize, n: usize },

    #[error("compression factor must lie in (0, 1], got {0}")]
    Gamma(f64),

    #[error("exhaustive clustering is limited to n <= {limit}, got n = {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: impl Into<String>) -> Self {
        Error::Dimension {
            context: context.into(),
        }
    }
}
