use thiserror::Error;

/// Errors raised by state construction, device validation and the protocol layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("basis has {labels} labels but {amplitudes} amplitudes")]
    LengthMismatch { labels: usize, amplitudes: usize },

    #[error("duplicate basis label {0}")]
    DuplicateLabel(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max deviation {0})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPositive(f64),

    #[error("invalid measurement basis: {0}")]
    InvalidBasis(String),

    #[error("invalid pipe index {0}, expected 1 or 2")]
    InvalidPipe(u8),

    #[error("invalid {field}: {constraint} (got {value})")]
    InvalidParameter {
        field: &'static str,
        constraint: &'static str,
        value: String,
    },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error(
        "hypotheses are indistinguishable (total variation {0:e}); no finite sample size exists"
    )]
    Indistinguishable(f64),

    #[error("no sample size up to {0} reaches the requested error rate")]
    SampleSizeExceeded(usize),

    #[error("frame velocity must satisfy |beta| < 1 (got {0})")]
    Superluminal(f64),

    #[error("at least one symbol is required")]
    NoSymbols,

    #[error("export failed: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn param(
        field: &'static str,
        constraint: &'static str,
        value: impl ToString,
    ) -> Self {
        Error::InvalidParameter {
            field,
            constraint,
            value: value.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
