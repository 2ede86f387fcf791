//! Polarity detection from the skewness of the LP residual and of a rough
//! glottal-flow-derivative estimate, both computed over the whole signal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsp::{
    autocorrelation, hanning_window, levinson_with_error, remove_dc, skewness, LpFrame,
};
use crate::error::{Error, Result};
use crate::filter_design::{design_elliptic_highpass, EllipticSpec};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Self::Positive => Self::Negative,
            Self::Negative => Self::Positive,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Self::Positive),
            "negative" => Ok(Self::Negative),
            other => Err(Error::InvalidManifest(format!(
                "unknown polarity {other:?}"
            ))),
        }
    }
}

/// Which statistic decides the polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `skew(r) - skew(g')`
    Reskew,
    /// `skew(r)`
    ReskewRes,
    /// `-skew(g')`
    ReskewGlot,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Reskew, Method::ReskewRes, Method::ReskewGlot];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Reskew => "reskew",
            Self::ReskewRes => "reskew-res",
            Self::ReskewGlot => "reskew-glot",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReskewConfig {
    pub frame_shift_ms: f64,
    pub frame_length_ms: f64,
    /// `None` selects `sample_rate / 1000 + 2`.
    pub lp_order: Option<usize>,
    pub cutoff_hz: f64,
    pub filter_order: usize,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
}

impl Default for ReskewConfig {
    fn default() -> Self {
        Self {
            frame_shift_ms: 5.0,
            frame_length_ms: 25.0,
            lp_order: None,
            cutoff_hz: 400.0,
            filter_order: EllipticSpec::DEFAULT_ORDER,
            passband_ripple_db: EllipticSpec::DEFAULT_RIPPLE_DB,
            stopband_atten_db: EllipticSpec::DEFAULT_ATTEN_DB,
        }
    }
}

impl ReskewConfig {
    pub fn with_cutoff(cutoff_hz: f64) -> Self {
        Self {
            cutoff_hz,
            ..Self::default()
        }
    }

    pub fn lp_order_for(&self, sample_rate: u32) -> usize {
        self.lp_order
            .unwrap_or_else(|| (sample_rate as f64 / 1000.0).round() as usize + 2)
    }

    pub fn elliptic_spec(&self, sample_rate: u32) -> EllipticSpec {
        EllipticSpec {
            order: self.filter_order,
            cutoff_hz: self.cutoff_hz,
            passband_ripple_db: self.passband_ripple_db,
            stopband_atten_db: self.stopband_atten_db,
            sample_rate,
        }
    }

    fn frame_geometry(&self, sample_rate: u32) -> Result<(usize, usize)> {
        if !(self.frame_shift_ms > 0.0 && self.frame_length_ms > self.frame_shift_ms) {
            return Err(Error::InvalidConfig(format!(
                "need frame length ({} ms) > frame shift ({} ms) > 0",
                self.frame_length_ms, self.frame_shift_ms
            )));
        }
        let fs = sample_rate as f64;
        let len = (self.frame_length_ms * fs / 1000.0).round() as usize;
        let hop = ((self.frame_shift_ms * fs / 1000.0).round() as usize).max(1);
        Ok((len, hop))
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let (len, _) = self.frame_geometry(sample_rate)?;
        let order = self.lp_order_for(sample_rate);
        if order < 2 || order >= len {
            return Err(Error::InvalidConfig(format!(
                "LP order {order} must be in [2, frame length {len})"
            )));
        }
        self.elliptic_spec(sample_rate).validate()
    }
}

/// Per-frame LP analysis on Hann-windowed frames of `x`.
pub fn lp_frames(x: &Signal, config: &ReskewConfig) -> Result<Vec<LpFrame>> {
    config.validate(x.sample_rate())?;
    let (len, hop) = config.frame_geometry(x.sample_rate())?;
    if x.len() < len {
        return Err(Error::SignalTooShort {
            needed: len,
            got: x.len(),
        });
    }
    let order = config.lp_order_for(x.sample_rate());
    let window = hanning_window(len);
    let mut buf = vec![0.0; len];
    let n_frames = (x.len() - len) / hop + 1;
    (0..n_frames)
        .map(|i| {
            let start = i * hop;
            for ((b, s), w) in buf
                .iter_mut()
                .zip(&x.samples()[start..start + len])
                .zip(&window)
            {
                *b = s * w;
            }
            let acf = autocorrelation(&buf, order)?;
            let (coeffs, gain) = if acf[0] > 0.0 {
                let (c, e) = levinson_with_error(&acf, order)?;
                (c, Some(e))
            } else {
                // Digital silence: nothing to predict.
                (vec![0.0; order], None)
            };
            Ok(LpFrame {
                center_index: start + len / 2,
                coeffs,
                gain,
            })
        })
        .collect()
}

/// Inverse filters `x` with `A(z)` of each frame, holding a frame's
/// coefficients over the hop centred on it. The filter memory is the input
/// history, so it runs continuously across segment boundaries. Samples before
/// the start are taken equal to the first one, so an offset causes no step.
pub fn inverse_filter(x: &Signal, frames: &[LpFrame], hop: usize) -> Signal {
    let s = x.samples();
    let mut out = vec![0.0; s.len()];
    for (i, frame) in frames.iter().enumerate() {
        let begin = if i == 0 {
            0
        } else {
            frame.center_index.saturating_sub(hop / 2)
        };
        let end = match frames.get(i + 1) {
            Some(next) => next.center_index.saturating_sub(hop / 2),
            None => s.len(),
        };
        for n in begin..end.min(s.len()) {
            let mut e = s[n];
            for (k, a) in frame.coeffs.iter().enumerate() {
                // History before the first sample repeats it.
                e -= a * if n > k { s[n - k - 1] } else { s[0] };
            }
            out[n] = e;
        }
    }
    Signal::from_trusted(out, x.sample_rate())
}

/// LP residual `r(n)`: speech inverse filtered with its own LP envelope.
pub fn lp_residual(speech: &Signal, config: &ReskewConfig) -> Result<Signal> {
    let frames = lp_frames(speech, config)?;
    let (_, hop) = config.frame_geometry(speech.sample_rate())?;
    Ok(inverse_filter(speech, &frames, hop))
}

/// Rough glottal flow derivative `g'(n)`: the original speech inverse
/// filtered with LP coefficients estimated on its high-passed version.
pub fn glottal_derivative(speech: &Signal, config: &ReskewConfig) -> Result<Signal> {
    config.validate(speech.sample_rate())?;
    let highpass = design_elliptic_highpass(&config.elliptic_spec(speech.sample_rate()))?;
    let filtered = highpass.apply(speech);
    let frames = lp_frames(&filtered, config)?;
    let (_, hop) = config.frame_geometry(speech.sample_rate())?;
    Ok(inverse_filter(speech, &frames, hop))
}

/// The two excitation signals and their whole-signal skewness.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationPair {
    pub residual: Signal,
    pub glottal_derivative: Signal,
    pub skew_residual: f64,
    pub skew_glottal: f64,
}

impl ExcitationPair {
    pub fn statistic(&self, method: Method) -> f64 {
        match method {
            Method::Reskew => self.skew_residual - self.skew_glottal,
            Method::ReskewRes => self.skew_residual,
            Method::ReskewGlot => -self.skew_glottal,
        }
    }

    /// Polarity under `method`; an exactly zero statistic is an error.
    pub fn decide(&self, method: Method) -> Result<Polarity> {
        let statistic = self.statistic(method);
        if statistic > 0.0 {
            Ok(Polarity::Positive)
        } else if statistic < 0.0 {
            Ok(Polarity::Negative)
        } else {
            Err(Error::ExactTie)
        }
    }
}

/// Removes DC once and computes both excitation signals and their skewness.
pub fn excitation_pair(speech: &Signal, config: &ReskewConfig) -> Result<ExcitationPair> {
    let speech = remove_dc(speech);
    let residual = lp_residual(&speech, config)?;
    let glottal_derivative = glottal_derivative(&speech, config)?;
    let skew_residual = skewness(residual.samples())?;
    let skew_glottal = skewness(glottal_derivative.samples())?;
    Ok(ExcitationPair {
        residual,
        glottal_derivative,
        skew_residual,
        skew_glottal,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarityDecision {
    pub polarity: Polarity,
    pub method: Method,
    pub statistic: f64,
    pub excitation: ExcitationPair,
}

pub fn detect_polarity(
    speech: &Signal,
    config: &ReskewConfig,
    method: Method,
) -> Result<PolarityDecision> {
    let excitation = excitation_pair(speech, config)?;
    let polarity = excitation.decide(method)?;
    Ok(PolarityDecision {
        polarity,
        method,
        statistic: excitation.statistic(method),
        excitation,
    })
}
