use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed descriptor at column {col}: {msg}")]
    Descriptor { msg: String, col: usize },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("element {0} does not belong to this group")]
    ContextMismatch(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("product undefined in local group: {0}")]
    Undefined(String),
    #[error("set is not symmetric")]
    NotSymmetric,
    #[error("set does not contain the identity")]
    MissingIdentity,
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("operation needs an abelian group of finite order")]
    NonAbelian,
}

pub type Result<T> = std::result::Result<T, Error>;
