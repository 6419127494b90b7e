use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The frequency sits on (or within tolerance of) a normal mode of the chain.
    #[error("omega = {omega} resonates with normal mode j = {mode}; use the regularized path")]
    Resonance { omega: f64, mode: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("linear solve failed: residual {residual:e} exceeds {tolerance:e}")]
    Solve { residual: f64, tolerance: f64 },

    /// The scaling coordinate `u` is too close to an integer.
    #[error("u = {u} is within {tolerance:e} of a pole")]
    Pole { u: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("force mode {ell}: {source}")]
    Mode {
        ell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn in_mode(self, ell: usize) -> Self {
        Error::Mode {
            ell,
            source: Box::new(self),
        }
    }
}
