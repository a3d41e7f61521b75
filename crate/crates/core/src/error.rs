use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("fields or operators live on different grids")]
    GridMismatch,

    #[error("shear profile uses mode {max_mode} but the grid only allows up to {allowed}")]
    ShearTooWide { max_mode: usize, allowed: usize },

    #[error("time step {dt:e} exceeds the RK4 stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("tail mass {tail:e} exceeded {limit:e} at t = {t}")]
    TailMassBreach { t: f64, tail: f64, limit: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("fit failure: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
