use std::path::PathBuf;

/// Errors raised by the model, the solvers and the sweep layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameter point lies outside the stability disk gbar2^2 + chi^2 < 1.
    #[error("unstable parameters: gbar2^2 + chi^2 = {radius_sq} (stability disk requires < 1)")]
    Instability { radius_sq: f64 },

    /// The spin rotation angle is undefined at gbar2 = chi = 0.
    #[error("rotation angle undefined at gbar2 = chi = 0")]
    DegenerateRotation,

    /// An eigensolve or optimization failed to reach its accuracy target.
    #[error("numeric failure: {what} (residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    /// The polaron minimizer ended on the edge of its search box.
    #[error("polaron optimizer stopped at the search-box boundary")]
    OptimizerBoundary,

    /// A regression could not be carried out.
    #[error("fit error: {0}")]
    Fit(String),

    /// A sweep specification failed validation; every violation is listed.
    #[error("invalid sweep specification:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    /// A result file could not be parsed.
    #[error("{path}:{line}:{column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Instability { .. } | Error::DegenerateRotation | Error::Validation(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
