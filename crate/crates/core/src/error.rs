use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("budget exceeded for {what}: requires {required}, budget {budget}")]
    Budget {
        what: String,
        required: usize,
        budget: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} did not converge (best residual {residual:e})")]
    NotConverged { what: String, residual: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
