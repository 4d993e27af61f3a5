use thiserror::Error;

/// Errors raised by the solvers, generators and file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions or shapes that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// Arguments outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An online responder broke the adversary protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Some client has no admissible facility at the current cost guess.
    #[error("client {client} has no facility with total cost <= {z}")]
    NoCandidate { client: usize, z: f64 },

    /// A problem exceeded the size limits of an exhaustive search.
    #[error("size guard: {0}")]
    SizeGuard(String),

    /// Invalid generator or experiment parameters.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed instance text.
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
