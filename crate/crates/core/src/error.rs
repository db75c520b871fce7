use thiserror::Error;

/// Errors raised by mesh construction, flux setup and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-positive volume-form weight {value} in cell {cell}")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("volume-form weight {value} in cell {cell} is below the lower bound {bound}")]
    WeightBelowBound { cell: usize, value: f64, bound: f64 },

    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: usize },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("unsupported flux: {0}")]
    UnsupportedFlux(String),

    #[error("scale factor a({t}) = {value} is not positive")]
    NonPositiveScaleFactor { t: f64, value: f64 },

    #[error("flux is not future time-like at u = {u}, x = {x}, t = {t}: d/du f^t = {rate}")]
    NotTimeLike { u: f64, x: f64, t: f64, rate: f64 },

    #[error("solver abort at step {step}: non-finite value in cell {cell}")]
    SolverAbort { step: usize, cell: usize },

    #[error("mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
