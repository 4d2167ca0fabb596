use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("invalid interval union: {0}")]
    InvalidIntervals(String),

    #[error("non-finite value {value} while evaluating {context} at index {index} (t = {t}, s = {s})")]
    NonFinite {
        context: &'static str,
        index: usize,
        t: f64,
        s: f64,
        value: f64,
    },

    #[error("weight `{label}` vanishes or is non-positive at t = {t}")]
    WeightNotPositive { label: String, t: f64 },

    #[error("kernel sign condition violated on the window: k(t, s)·eta(s) = {value} at t = {t}, s = {s}")]
    SignViolation { t: f64, s: f64, value: f64 },

    #[error("window integral infimum is not positive: {value} at t = {t}")]
    NonPositiveInfimum { t: f64, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("test vector entry {index} is not strictly positive ({value})")]
    NonPositiveVector { index: usize, value: f64 },

    #[error("window {window} lies outside the resolved grid range [{lo}, {hi}]")]
    WindowOutsideGrid { window: String, lo: f64, hi: f64 },

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
