use thiserror::Error;

/// Errors raised by spaces, systems, symbolic machinery and detectors.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("points belong to different state spaces: {0}")]
    MixedSpace(String),

    #[error("symbolic window exhausted after {limit} symbols")]
    WindowExhausted { limit: usize },

    #[error("epsilon net would need {needed} points (max {max})")]
    NetTooLarge { needed: usize, max: usize },

    #[error("horizon {requested} exceeds configured maximum {max}")]
    HorizonTooLarge { requested: u64, max: u64 },

    #[error("mechanical symbol at index {index} unresolved at {bits} bits of precision")]
    PrecisionExhausted { index: u64, bits: u32 },

    #[error("factor language of length {length} not stable after {iterations} iterations")]
    CertificationFailed { length: usize, iterations: usize },

    #[error("coding tree certified to depth {certified}, depth {requested} requested")]
    CertifiedDepthExceeded { requested: usize, certified: usize },

    #[error("word is not admissible in the {0} language")]
    InvalidWord(String),

    #[error("image point {0} lies in no cover member")]
    CoverageGap(String),

    #[error("no sample fell inside region {0}")]
    EmptyRegion(String),

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("report holds no {0} series")]
    MissingSeries(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
