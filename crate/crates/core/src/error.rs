use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator could not continue.
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// The Chebyshev propagator lost unitarity.
    #[error("propagation error: norm drifted to {norm} (|1 - norm| > {tolerance})")]
    Propagation { norm: f64, tolerance: f64 },

    /// A coherent (or ground) state leaks beyond the boson cutoff.
    #[error("truncation loss {loss:e} at n_max = {n_max} exceeds {limit:e}; increase n_max")]
    Truncation { loss: f64, n_max: usize, limit: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Hilbert space dimension {dim} exceeds the configured cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("time series needs at least two samples, got {0}")]
    TooFewSamples(usize),

    /// Invalid run configuration; names the offending key.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::DimensionTooLarge { .. } => 1,
            Error::Io(_) | Error::Serialization(_) => 3,
            _ => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Serialization(format!("{other:?}")),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Serialization(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
