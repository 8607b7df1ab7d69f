use thiserror::Error;

/// Errors raised by the solver, the particle simulator and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid measure: {0}")]
    Measure(String),

    #[error("evaluation past the axis hitting time (t = {t}, T(s) = {hit})")]
    PastSingularity { t: f64, hit: f64 },

    #[error("root finder did not converge: {0}")]
    Convergence(String),

    #[error("characteristic oracle inconsistent at t = {t}: {reason}")]
    OracleInconsistency { t: f64, reason: String },

    #[error("total jump rate underflow ({rate:e}) at t = {time}")]
    Stalled { rate: f64, time: f64 },

    #[error("explosion detected at t = {time} after {events} events (mean mass {mean:e})")]
    ExplosionDetected { time: f64, events: u64, mean: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
