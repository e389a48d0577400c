use alloc::string::String;

/// Errors raised by model construction, evolution and analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("level index {index} out of range 1..={levels}")]
    LevelOutOfRange { index: usize, levels: usize },
    #[error("photon number {photons} exceeds cutoff {n_max}")]
    PhotonOutOfRange { photons: usize, n_max: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("norm drift {drift:e} exceeds tolerance at t = {time}")]
    NormDrift { time: f64, drift: f64 },
    #[error("truncation overflow: population {population:e} near the cutoff at t = {time}")]
    TruncationOverflow { time: f64, population: f64 },
    #[error("trajectory extinct: no-count norm underflow at t = {time}")]
    Extinct { time: f64 },
    #[error("outcome probability {probability:e} is too small to condition on")]
    ImpossibleOutcome { probability: f64 },
    #[error("{formula} evaluated outside its validity domain: {reason}")]
    OutOfDomain { formula: &'static str, reason: String },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
