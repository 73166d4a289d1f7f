use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure of a completion or embedding backend.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmFailure {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out after {0} s")]
    Timeout(u64),
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("entity label is empty")]
    EmptyLabel,
    #[error("relation `{0}` is not in the active catalog")]
    UnknownRelation(String),

    #[error("catalog `{0}` not found")]
    NotFound(String),
    #[error("duplicate relation `{0}` in catalog")]
    DuplicateRelation(String),
    #[error("catalog `{0}` has no relations")]
    EmptyCatalog(String),
    #[error("relation candidate is empty")]
    EmptyCandidate,

    #[error("malformed triple output: {0}")]
    MalformedTriple(String),
    #[error("malformed relation chain: {0}")]
    MalformedChain(String),
    #[error(transparent)]
    Llm(#[from] LlmFailure),

    #[error("relation chain has no relations")]
    EmptyChain,
    #[error("entity `{0}` cannot be resolved to an identifier")]
    UnresolvableEntity(String),
    #[error("relation `{0}` cannot be resolved to an identifier")]
    UnresolvableRelation(String),
    #[error("SPARQL transport error: {0}")]
    Transport(String),
    #[error("malformed SPARQL response: {0}")]
    MalformedResponse(String),

    #[error("fact memory is empty")]
    EmptyMemory,

    #[error("schema error in record {index}: {message}")]
    Schema { index: usize, message: String },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed input data rather than the environment.
    pub fn is_schema_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Parse { .. }
                | Error::Json(_)
                | Error::DuplicateRelation(_)
        )
    }
}
