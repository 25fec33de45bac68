use thiserror::Error;

/// Errors raised by the circulator-receiver models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no sections")]
    NoSections,
    #[error("degenerate network")]
    DegenerateNetwork,
    #[error("balance unreachable: the null requires an open circuit at BAL")]
    BalanceUnreachable,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("noise model requires a nominal antenna (Zant = Z0), got {zant}")]
    NonNominalAntenna { zant: num_complex::Complex64 },
    #[error("steady state not reached after {periods} LO periods (last relative delta {last_delta:.3e})")]
    NonConvergence { periods: usize, last_delta: f64 },
    #[error("clock phases overlap")]
    OverlappingClocks,
    #[error("phase shift {deg} deg does not land on the time grid")]
    PhaseOffGrid { deg: f64 },
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("frequency {f} Hz is not below Nyquist ({nyquist} Hz)")]
    Aliasing { f: f64, nyquist: f64 },
    #[error("sync failed: peak-to-next ratio {ratio_db:.2} dB")]
    SyncFailed { ratio_db: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
