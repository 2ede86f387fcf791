//! Numeric kernels shared by the analysis, degradation and synthesis code.

pub(crate) mod filter;
mod lpc;
mod stats;
mod window;

pub use filter::{fir_convolve, iir_filter, remove_dc, IirCoeffs};
pub use lpc::{autocorrelation, levinson_durbin, levinson_with_error, LpFrame, RIDGE};
pub use stats::skewness;
pub use window::hanning_window;
