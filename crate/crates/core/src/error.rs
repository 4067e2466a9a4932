use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge. `estimate` is the best value
    /// reached before giving up, when one exists.
    #[error("numerical error: {message} (estimate {estimate:?})")]
    Numerical {
        message: String,
        estimate: Option<f64>,
    },

    /// The centrifugal term diverges: a ray with nonzero OAM reached the axis.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Grid or solver configuration that cannot resolve the requested problem.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested feature (focus, waist, minimum) does not exist in range.
    #[error("not found: {0}")]
    NotFound(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, estimate: Option<f64>) -> Self {
        Error::Numerical {
            message: msg.into(),
            estimate,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
