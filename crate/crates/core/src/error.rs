use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A variable name or alphabet label did not resolve.
    #[error("unknown name: {0}")]
    Name(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("conditioning on an event of probability zero: {0}")]
    NullEvent(String),

    #[error("variable name collision: {0}")]
    NameCollision(String),

    /// A configured size or horizon limit was exceeded.
    #[error("limit exceeded: {0}")]
    Limit(String),

    /// Malformed or inconsistent input artifact.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("unsupported view: {0}")]
    UnsupportedView(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
