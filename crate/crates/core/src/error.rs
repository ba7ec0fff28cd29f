use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
    #[error("environment is not symmetric; permute it first or pick a symmetric kind")]
    Asymmetric,
    #[error("allocation is not swap monotone at position {0}")]
    NotSwapMonotone(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("instance too large: n = {n} exceeds the limit {limit} for {what}")]
    SizeLimit { n: usize, limit: usize, what: &'static str },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
