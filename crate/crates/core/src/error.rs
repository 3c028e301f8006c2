use thiserror::Error;

/// Errors produced by the kreg library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("radix must be at least 2, got {0}")]
    InvalidRadix(u32),

    #[error("digit {digit} out of range for radix {radix}")]
    InvalidDigit { digit: u32, radix: u32 },

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("could not parse scalar {0:?}")]
    ParseScalar(String),

    #[error("unknown catalog entry {0:?}")]
    UnknownCatalogEntry(String),

    #[error("operation requires a basis representation: {0}")]
    NotBasis(String),

    #[error("sequence horizon {available} too small, need {required}")]
    HorizonTooSmall { required: u64, available: u64 },

    #[error("kernel rank still growing at depth {depth} (rank {rank})")]
    RankStillGrowing { depth: u32, rank: usize },

    #[error("missing expansion for kernel child ({ell}, {r})")]
    MissingChild { ell: u32, r: u64 },

    #[error("sequence is eventually zero on the sampled range")]
    EventuallyZero,

    #[error("work budget of {0} products exceeded")]
    BudgetExceeded(u64),

    #[error("spanning words not found within budget {budget} (rank {rank} of {dim}); representation is likely not basis-grade")]
    SpanningBudgetExhausted {
        budget: u64,
        rank: usize,
        dim: usize,
    },

    #[error("kernel expansion does not reproduce basis sequence {index} at n = {n}")]
    ExpansionMismatch { index: usize, n: u64 },

    #[error("representations disagree at n = {0}")]
    RepresentationsDisagree(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
