use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m - m†| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace} instead of 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("quadrature did not converge: result changed by {change:.3e} when the node count doubled")]
    NonConvergence { change: f64 },

    #[error("missing measurement basis `{0}`")]
    MissingBasis(String),

    #[error("tabulated spectrum: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { field, reason: reason.into() }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
