use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("sequence has zero variance")]
    ZeroVariance,

    #[error("lag {max_lag} must be smaller than frame length {len}")]
    LagTooLarge { max_lag: usize, len: usize },

    #[error("Toeplitz system is singular at recursion step {step}")]
    SingularToeplitz { step: usize },

    #[error("signal too short for analysis: need {needed} samples, got {got}")]
    SignalTooShort { needed: usize, got: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("invalid sample rate {0}")]
    InvalidSampleRate(u32),

    #[error("invalid filter coefficients: {0}")]
    InvalidCoeffs(String),

    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("polarity statistic is exactly zero")]
    ExactTie,

    #[error("noise has {noise} samples but clean signal has {clean}")]
    NoiseTooShort { noise: usize, clean: usize },

    #[error("input power is zero")]
    SilentInput,

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),

    #[error("invalid room geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid voice spec: {0}")]
    InvalidVoice(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("manifest is empty")]
    EmptyManifest,

    #[error("audio file {path}: {message}")]
    Audio { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
