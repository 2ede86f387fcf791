//! Speech polarity detection from the skewness of two excitation signals:
//! the LP residual and a rough glottal-flow-derivative estimate.
//!
//! Also contains the degradation harness (additive noise, image-method
//! reverberation), a synthetic voice generator with known polarity, and a
//! batch evaluator.

pub mod degrade;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod filter_design;
pub mod reskew;
pub mod signal;
pub mod synth;
pub mod wav;

pub use error::{Error, Result};
pub use reskew::{
    detect_polarity, ExcitationPair, Method, Polarity, PolarityDecision, ReskewConfig,
};
pub use signal::Signal;
