use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Every variant maps to a stable, machine-parsable code (see [`Error::code`])
/// that the command-line front end prints as `code: message`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("{0}")]
    Domain(String),

    #[error(
        "kinetic multiplier overflow: hbar*k_max = {value:.3} exceeds {limit}; \
         shrink the grid extent ratio (fewer points or a wider domain)"
    )]
    MultiplierOverflow { value: f64, limit: f64 },

    #[error("eigensolver did not converge (max residual {residual:.3e}, tolerance {tolerance:.3e})")]
    SolverNonConvergence { residual: f64, tolerance: f64 },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("field is masked everywhere")]
    EmptyField,

    #[error("star-product series grows at order {order} (term ratio {ratio:.3e})")]
    SeriesNonConvergence { order: usize, ratio: f64 },

    #[error("blow-up at step {step}: {detail}")]
    BlowUp { step: usize, detail: String },

    #[error("value {value} outside sampled range [{min}, {max}]")]
    Extrapolation { value: f64, min: f64, max: f64 },

    #[error("insufficient snapshots: need at least {need}, got {got}")]
    InsufficientSnapshots { need: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("evaluation window is empty: {0}")]
    EmptyWindow(String),

    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::DegenerateState(_) => "degenerate_state",
            Error::Domain(_) => "domain_error",
            Error::MultiplierOverflow { .. } => "multiplier_overflow",
            Error::SolverNonConvergence { .. } => "solver_nonconvergence",
            Error::Truncation(_) => "truncation",
            Error::EmptyField => "empty_field",
            Error::SeriesNonConvergence { .. } => "series_nonconvergence",
            Error::BlowUp { .. } => "blow_up",
            Error::Extrapolation { .. } => "extrapolation",
            Error::InsufficientSnapshots { .. } => "insufficient_snapshots",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::EmptyWindow(_) => "empty_window",
            Error::Shape(_) => "shape_mismatch",
        }
    }

    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
