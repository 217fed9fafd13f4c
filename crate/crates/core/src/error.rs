use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical blow-up at step {step} (t = {time})")]
    BlowUp { step: u64, time: f64 },

    #[error("undefined relative drift: reference value is zero")]
    UndefinedDrift,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-positive value {value} at index {index} in {what}")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("Toda tangency undefined for β-model (alpha = 0)")]
    TodaTangencyUndefined,

    #[error("no shock (rarefaction-only datum)")]
    NoShock,

    #[error("post-shock time requested: tau = {tau} >= tau_s = {tau_s}")]
    PostShock { tau: f64, tau_s: f64 },

    #[error("characteristic solve did not converge at grid point {index}")]
    NewtonFailed { index: usize },

    #[error("oscillatory quadrature did not converge (achieved relative change {achieved:e})")]
    QuadratureNotConverged { achieved: f64 },

    #[error("degenerate maximizer at x = {x}; asymptotics invalid")]
    DegenerateMaximizer { x: f64 },

    #[error("spectral tail {tail:e} exceeds 1e-3 of peak {peak:e} at t = {time}")]
    Aliasing { tail: f64, peak: f64, time: f64 },

    #[error("configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("cannot compare summaries of different experiments ({a} vs {b})")]
    MismatchedExperiments { a: String, b: String },

    #[error("column `{0}` not found in trajectory record")]
    MissingColumn(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
