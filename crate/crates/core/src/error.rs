use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} sites, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("capacity exceeded: {what} on N = {n} sites, limit is {limit}")]
    Capacity {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{what} index {index} out of range {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        lo: usize,
        hi: usize,
    },

    #[error("steady-state solver did not converge after {steps} steps (best residual {best_residual:.3e})")]
    Convergence { steps: usize, best_residual: f64 },

    #[error("cannot reduce boundary generators: {0}")]
    Reduction(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    /// True for errors caused by the input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::Capacity { .. }
                | Error::Spec(_)
                | Error::Config(_)
                | Error::OutOfRange { .. }
        )
    }
}
