use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed system descriptor: {0}")]
    Descriptor(String),

    #[error("odometer base entry {0} is smaller than 2")]
    BaseTooSmall(u64),

    #[error("substitution is not primitive")]
    NotPrimitive,

    #[error("substitution subshift is periodic (complexity stalls at length {0})")]
    Periodic(usize),

    #[error("word {0:?} is not admissible")]
    Inadmissible(String),

    #[error("clopen sets belong to different systems")]
    SystemMismatch,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("return-time guard exceeded after {0} cylinder steps")]
    GuardExceeded(usize),

    #[error(
        "disjointness hypothesis violated: inner slice meets its preimage under the induced map"
    )]
    Disjointness,

    #[error("measure table does not cover window length {0}")]
    MeasureDepth(usize),

    #[error("kernel input violates the vanishing mask at atom {atom}, s = {s}, u = {u}")]
    MaskViolation { atom: usize, s: f64, u: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
