use thiserror::Error;

/// Errors raised anywhere in the core crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constitutive law: {0}")]
    InvalidLaw(String),

    #[error("root solve for s(x, xi) failed at cell {cell} (xi = {xi:e}, residual = {residual:e})")]
    RootNotConverged { cell: usize, xi: f64, residual: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("non-finite integrand at cell {cell}")]
    NonFiniteIntegrand { cell: usize },

    #[error("field `{field}` must be positive but is {value:e} at cell {cell}")]
    NonPositiveWeight { field: String, cell: usize, value: f64 },

    #[error("inadmissible parameters, violated: {}", .conditions.join("; "))]
    Inadmissible { conditions: Vec<String> },

    #[error("degenerate test-function family: {0}")]
    DegenerateFamily(String),

    #[error("solver failure at t = {t:e}: {reason}")]
    SolverFailure { t: f64, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field spec `{spec}`: {reason}")]
    FieldSpec { spec: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
