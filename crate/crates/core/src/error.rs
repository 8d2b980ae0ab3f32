use thiserror::Error;

/// Errors raised by the numerical and physical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: {intervals} intervals used, estimated error {error:e} vs tolerance {tolerance:e}")]
    NonConvergence {
        intervals: usize,
        error: f64,
        tolerance: f64,
    },
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("function never falls below {threshold:e} inside the bracket")]
    NoCrossing { threshold: f64 },
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("proposal envelope violated at x = {x:e} (density/envelope ratio {ratio})")]
    EnvelopeViolation { x: f64, ratio: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("deconvolved variance is negative ({0:e} m^2); slits too wide for the measured width")]
    NegativeVariance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NoCrossing { .. }
                | Error::EnvelopeViolation { .. }
                | Error::NegativeVariance(_)
                | Error::InsufficientData(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
