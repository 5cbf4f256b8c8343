use thiserror::Error;

/// Error type shared by the whole engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed dataset file: {0}")]
    Format(String),

    #[error("bad data: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("query length {got} outside [{l_min}, {l_max}]")]
    QueryLength { got: usize, l_min: usize, l_max: usize },

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported index file version {0}")]
    Version(u8),

    #[error("dataset fingerprint mismatch: {0}")]
    Fingerprint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
