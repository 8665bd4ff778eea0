use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label `{0}` is already registered")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("beam splitter needs two distinct modes, got `{0}` twice")]
    IdenticalModes(String),

    #[error("parameter `{name}` out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("expected exactly two memories, found {0}")]
    MemoryCount(usize),

    #[error("mode coverage incomplete: `{0}` is neither measured nor traced")]
    IncompleteCoverage(String),

    #[error("outcome {outcome} is not valid for detector {detector}")]
    InvalidOutcome { detector: String, outcome: String },

    #[error("conditioning on an outcome of zero probability")]
    ZeroProbability,

    #[error("density matrix trace {0} differs from one")]
    NotNormalized(f64),

    #[error("correction requested for a failed outcome")]
    FailedOutcome,

    #[error("detector {0} is not supported by this protocol")]
    UnsupportedDetector(String),

    #[error("Fock cutoff {n_max} too small: norm deficit {deficit:e}")]
    CutoffInadequate { n_max: usize, deficit: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
