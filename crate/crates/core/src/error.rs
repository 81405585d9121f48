use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("no power g^n with 1 <= n <= {cap} is trivial")]
    OrderExceedsCap { cap: u64 },

    #[error("ill-formed partition: {0}")]
    IllFormedPartition(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("coset comparison needs an element of length {needed}, cap is {cap}")]
    CapTooSmall { needed: usize, cap: usize },

    #[error("ball materialization exceeded {cap} vertices")]
    ResourceCap { cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
