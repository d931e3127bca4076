use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: requested tol {requested:e}, achieved {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    /// A root could not be bracketed or polished to tolerance.
    #[error("root finding failed in {op}: {msg}")]
    RootFind { op: &'static str, msg: String },

    /// Solver blow-up or invariant violation during time stepping.
    #[error("solver error at t = {t}: {msg}")]
    Solver { t: f64, msg: String },

    /// Config file syntax or schema problem.
    #[error("config error at {path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },

    /// Experiment setup rejected (geometry, constraint violation, ...).
    #[error("invalid experiment setup: {0}")]
    Setup(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
