use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table too large: r^k = {0} exceeds 2^24 entries")]
    TableTooLarge(u64),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("spin set mismatch: {0}")]
    SpinSetMismatch(String),
    #[error("constraint is not uniquely extendable at position {position}, partial {partial:?} has {count} extensions")]
    NotUniquelyExtendable {
        position: usize,
        partial: Vec<u8>,
        count: usize,
    },
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unknown constraint function: {0}")]
    UnknownFunction(String),
    #[error("{0}")]
    Invalid(String),
    #[error("iteration cap exceeded: {0}")]
    IterationCap(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
