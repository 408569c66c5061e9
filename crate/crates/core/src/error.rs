use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} outside the sampled range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("quadrature did not converge within budget (partial value {partial}, error estimate {err_estimate})")]
    QuadratureNonConvergence { partial: f64, err_estimate: f64 },

    #[error("radius {radius} is below the inversion grid resolution {resolution}")]
    Resolution { radius: f64, resolution: f64 },

    #[error("fit impossible: {condition}")]
    FitImpossible { condition: String },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
