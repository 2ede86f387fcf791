use std::ops::Neg;

use crate::error::{Error, Result};

/// Mono audio samples together with their sample rate.
///
/// Constructors reject non-finite samples and a zero rate, so every `Signal`
/// in circulation is finite-valued.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSampleRate(sample_rate));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a signal from samples known to be finite (internal kernels).
    pub(crate) fn from_trusted(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Mean square over the whole signal.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|x| x * gain).collect(),
            self.sample_rate,
        )
    }

    /// Returns a copy padded with `lead` zeros before and `trail` zeros after.
    pub fn padded(&self, lead: usize, trail: usize) -> Self {
        let mut samples = vec![0.0; lead + self.samples.len() + trail];
        samples[lead..lead + self.samples.len()].copy_from_slice(&self.samples);
        Self::from_trusted(samples, self.sample_rate)
    }
}

impl Neg for &Signal {
    type Output = Signal;

    fn neg(self) -> Signal {
        Signal::from_trusted(self.samples.iter().map(|x| -x).collect(), self.sample_rate)
    }
}

impl Neg for Signal {
    type Output = Signal;

    fn neg(mut self) -> Signal {
        self.samples.iter_mut().for_each(|x| *x = -*x);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_zero_rate() {
        assert!(matches!(
            Signal::new(vec![0.0, f64::NAN], 16000),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(
            Signal::new(vec![0.0], 0),
            Err(Error::InvalidSampleRate(0))
        ));
    }

    #[test]
    fn negation_is_exact() {
        let s = Signal::new(vec![0.25, -1.5, 3.0], 8000).unwrap();
        let n = -&s;
        assert_eq!(n.samples(), &[-0.25, 1.5, -3.0]);
        assert_eq!(-n, s);
    }

    #[test]
    fn padding() {
        let s = Signal::new(vec![1.0, 2.0], 8000).unwrap();
        assert_eq!(s.padded(2, 1).samples(), &[0.0, 0.0, 1.0, 2.0, 0.0]);
    }
}
