use thiserror::Error;

/// Errors raised by the library. The CLI maps each kind to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid or staggering mismatch: {0}")]
    Mismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("incompatible right-hand side: relative grid sum {relative:.3e} exceeds {limit:.1e}")]
    IncompatibleRhs { relative: f64, limit: f64 },

    #[error("{solver} did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { solver: &'static str, iterations: usize, residual: f64 },

    #[error("{solver} diverged after {iterations} iterations")]
    Diverged { solver: &'static str, iterations: usize },

    #[error("non-finite state after step {step}")]
    BlowUp { step: usize },

    #[error("stability guard violated: {0}")]
    Stability(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Mismatch(_) | Error::Stability(_) => 1,
            Error::Budget(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
