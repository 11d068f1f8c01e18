use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A log-modulus left the representable range; the value and the active
    /// horizon are recorded so callers can report how far they got.
    #[error("horizon exceeded: |log r| = {log_r:.6e} > L_max = {l_max:.6e}")]
    HorizonExceeded { log_r: f64, l_max: f64 },

    #[error("evaluation produced a non-finite value")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at byte {pos}: {reason}")]
    Parse { pos: usize, reason: String },

    #[error("no grid radius satisfies the threshold conditions ({0})")]
    ThresholdNotFound(String),

    #[error("modulus iteration does not expand at the supplied threshold: {0}")]
    NotExpanding(String),

    #[error("covering chain inequality fails at level {level}: {detail}")]
    ChainViolation { level: i64, detail: String },

    #[error("mixed-annulus inequality fails at step {index}: {detail}")]
    InequalityViolation { index: usize, detail: String },

    #[error("no cell survives subdivision at round {round} ({detail})")]
    NoCellSurvives { round: usize, detail: String },

    #[error("itinerary transition {from} -> {to} is outside every certified covered range")]
    Unrealizable { from: i64, to: i64 },

    #[error("render window of {requested} pixels exceeds the cap of {cap}")]
    PixelCapExceeded { requested: u64, cap: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
