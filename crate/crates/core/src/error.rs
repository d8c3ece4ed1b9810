use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-canonical hypothesis: {0}")]
    NonCanonical(String),
    #[error("corrupt encoding: {0}")]
    Encoding(String),
    #[error("decision diagram: {0}")]
    Bdd(vsl_bdd::BddError),
    #[error("solver: {0}")]
    Solver(String),
    #[error("computation cancelled")]
    Cancelled,
    #[error("resource limit reached: {0}")]
    ResourceExhausted(String),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },
    #[error("generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<vsl_bdd::BddError> for Error {
    fn from(e: vsl_bdd::BddError) -> Self {
        match e {
            vsl_bdd::BddError::Interrupted => Error::Cancelled,
            vsl_bdd::BddError::NodeLimit(n) => Error::ResourceExhausted(format!("decision diagram node limit {n}")),
            other => Error::Bdd(other),
        }
    }
}
