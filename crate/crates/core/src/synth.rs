//! Source-filter synthesis of sustained vowels with a known polarity.
//!
//! The source is the derivative of a Rosenberg glottal pulse, which has one
//! dominant negative peak per cycle at glottal closure. It is shaped by a
//! cascade of two-pole formant resonators.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reskew::Polarity;
use crate::signal::Signal;

/// Peak amplitude of synthesized voices.
pub const PEAK_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceSpec {
    pub f0_hz: f64,
    pub duration_s: f64,
    /// `(center_hz, bandwidth_hz)` per resonance.
    pub formants: Vec<(f64, f64)>,
    /// Uniform per-cycle period perturbation, in percent.
    pub jitter_pct: f64,
    pub polarity: Polarity,
    pub seed: u64,
    /// Opening phase as a fraction of the period.
    pub opening: f64,
    /// Closing phase as a fraction of the period.
    pub closing: f64,
    /// Level of white aspiration noise added to the source, in dB relative
    /// to the source RMS; `None` disables it.
    pub aspiration_db: Option<f64>,
    /// Linear F0 declination: F0 moves from `f0 (1 + p)` to `f0 (1 - p)`
    /// over the utterance, with `p = intonation_pct / 100`.
    pub intonation_pct: f64,
    /// Syllable-rate amplitude envelope `sin^2(pi r t)`; `None` keeps a
    /// steady amplitude.
    pub syllable_rate_hz: Option<f64>,
}

impl VoiceSpec {
    pub const DEFAULT_OPENING: f64 = 0.6;
    pub const DEFAULT_CLOSING: f64 = 0.3;
    pub const DEFAULT_ASPIRATION_DB: f64 = -30.0;
    pub const DEFAULT_INTONATION_PCT: f64 = 10.0;
    pub const DEFAULT_SYLLABLE_RATE_HZ: Option<f64> = None;

    pub fn new(f0_hz: f64, formants: Vec<(f64, f64)>, polarity: Polarity, seed: u64) -> Self {
        Self {
            f0_hz,
            duration_s: 1.0,
            formants,
            jitter_pct: 1.0,
            polarity,
            seed,
            opening: Self::DEFAULT_OPENING,
            closing: Self::DEFAULT_CLOSING,
            aspiration_db: Some(Self::DEFAULT_ASPIRATION_DB),
            intonation_pct: Self::DEFAULT_INTONATION_PCT,
            syllable_rate_hz: Self::DEFAULT_SYLLABLE_RATE_HZ,
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        let fail = |m: String| Err(Error::InvalidVoice(m));
        if !(50.0..=500.0).contains(&self.f0_hz) {
            return fail(format!("f0 {} Hz outside [50, 500]", self.f0_hz));
        }
        if self.duration_s.is_nan() || self.duration_s <= 0.0 {
            return fail(format!("duration {} s", self.duration_s));
        }
        if !(0.0..50.0).contains(&self.jitter_pct) {
            return fail(format!("jitter {}%", self.jitter_pct));
        }
        if !(0.0..50.0).contains(&self.intonation_pct) {
            return fail(format!("intonation {}%", self.intonation_pct));
        }
        if let Some(r) = self.syllable_rate_hz {
            if !(r > 0.0 && r < self.f0_hz) {
                return fail(format!("syllable rate {r} Hz"));
            }
        }
        if !(self.opening > 0.0 && self.closing > 0.0 && self.opening + self.closing < 1.0) {
            return fail(format!(
                "phases opening {} + closing {} must be positive and < 1",
                self.opening, self.closing
            ));
        }
        for &(f, bw) in &self.formants {
            if !(f > 0.0 && f < nyquist && bw > 0.0) {
                return fail(format!("formant ({f}, {bw}) invalid at {sample_rate} Hz"));
            }
        }
        Ok(())
    }
}

/// Rosenberg flow derivative at `t` samples into a cycle.
fn rosenberg_derivative(t: f64, open: f64, close: f64) -> f64 {
    if t < open {
        PI / (2.0 * open) * (PI * t / open).sin()
    } else if t < open + close {
        -PI / (2.0 * close) * (PI * (t - open) / (2.0 * close)).sin()
    } else {
        0.0
    }
}

/// Glottal flow derivative pulse train. Positive polarity puts the negative
/// peak at each closure; negative polarity is the exact negation.
pub fn glottal_source(spec: &VoiceSpec, sample_rate: u32) -> Result<Signal> {
    spec.validate(sample_rate)?;
    let n = (spec.duration_s * sample_rate as f64).round() as usize;
    let nominal = sample_rate as f64 / spec.f0_hz;
    let jitter = spec.jitter_pct / 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut out = vec![0.0; n];
    let mut cycle_start = 0.0f64;
    while cycle_start < n as f64 {
        let progress = cycle_start / n as f64;
        let contour = 1.0 + spec.intonation_pct / 100.0 * (1.0 - 2.0 * progress);
        let base = nominal / contour;
        let period = if jitter > 0.0 {
            base * (1.0 + jitter * rng.random_range(-1.0..=1.0))
        } else {
            base
        };
        let gain = match spec.syllable_rate_hz {
            Some(rate) => (PI * rate * cycle_start / sample_rate as f64).sin().powi(2),
            None => 1.0,
        };
        let (open, close) = (spec.opening * period, spec.closing * period);
        let first = cycle_start.ceil() as usize;
        let last = ((cycle_start + period).ceil() as usize).min(n);
        for (i, slot) in out.iter_mut().enumerate().take(last).skip(first) {
            *slot = gain * rosenberg_derivative(i as f64 - cycle_start, open, close);
        }
        cycle_start += period;
    }
    if let Some(db) = spec.aspiration_db {
        let rms = (out.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64).sqrt();
        let level = rms * 10f64.powf(db / 20.0);
        for v in out.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += level * e;
        }
    }
    if spec.polarity == Polarity::Negative {
        out.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Signal::from_trusted(out, sample_rate))
}

/// Unity-DC-gain two-pole resonator coefficients `(a, b, c)` for
/// `y[n] = a x[n] + b y[n-1] + c y[n-2]`.
fn resonator(center_hz: f64, bandwidth_hz: f64, sample_rate: u32) -> (f64, f64, f64) {
    let t = 1.0 / sample_rate as f64;
    let c = -(-2.0 * PI * bandwidth_hz * t).exp();
    let b = 2.0 * (-PI * bandwidth_hz * t).exp() * (2.0 * PI * center_hz * t).cos();
    (1.0 - b - c, b, c)
}

/// Raised-cosine onset and offset length, in seconds.
pub const FADE_S: f64 = 0.02;

/// Source through the formant cascade, faded in and out, peak-normalized.
pub fn synthesize_voice(spec: &VoiceSpec, sample_rate: u32) -> Result<Signal> {
    let mut x = glottal_source(spec, sample_rate)?.into_samples();
    for &(f, bw) in &spec.formants {
        let (a, b, c) = resonator(f, bw, sample_rate);
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = a * *v + b * y1 + c * y2;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
    let ramp = ((FADE_S * sample_rate as f64) as usize).min(x.len() / 2);
    for i in 0..ramp {
        let g = 0.5 - 0.5 * (std::f64::consts::PI * i as f64 / ramp as f64).cos();
        let last = x.len() - 1 - i;
        x[i] *= g;
        x[last] *= g;
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let g = PEAK_LEVEL / peak;
        x.iter_mut().for_each(|v| *v *= g);
    }
    Signal::new(x, sample_rate)
}

/// Vowel formant sets `(name, [(F, B); 3])` used by the standard grid.
pub const VOWELS: [(&str, [(f64, f64); 3]); 3] = [
    ("ae", [(660.0, 80.0), (1720.0, 100.0), (2410.0, 120.0)]),
    ("a", [(730.0, 90.0), (1090.0, 110.0), (2440.0, 120.0)]),
    ("e", [(530.0, 70.0), (1840.0, 100.0), (2480.0, 120.0)]),
];

pub const GRID_F0_HZ: [f64; 5] = [80.0, 120.0, 180.0, 240.0, 300.0];
pub const GRID_SEEDS: u64 = 5;
/// Voices at or above this F0 use the higher-register formant scaling.
pub const HIGH_REGISTER_F0_HZ: f64 = 200.0;
/// Average ratio of female to male formant frequencies.
pub const HIGH_REGISTER_FORMANT_SCALE: f64 = 1.17;

/// Formants of a grid vowel for a voice at `f0_hz`, bandwidths scaled alike.
pub fn register_formants(formants: &[(f64, f64)], f0_hz: f64) -> Vec<(f64, f64)> {
    let k = if f0_hz >= HIGH_REGISTER_F0_HZ {
        HIGH_REGISTER_FORMANT_SCALE
    } else {
        1.0
    };
    formants.iter().map(|&(f, b)| (f * k, b * k)).collect()
}

/// One named entry of the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub name: String,
    pub spec: VoiceSpec,
}

/// The standard grid: every F0 x vowel x polarity x seed (150 voices).
pub fn standard_grid() -> Vec<GridEntry> {
    let mut grid = Vec::new();
    for &f0 in &GRID_F0_HZ {
        for (vowel, formants) in VOWELS {
            for polarity in [Polarity::Positive, Polarity::Negative] {
                for seed in 0..GRID_SEEDS {
                    grid.push(GridEntry {
                        name: format!("{vowel}_f0{}_{polarity}_s{seed}", f0 as u32),
                        spec: VoiceSpec::new(f0, register_formants(&formants, f0), polarity, seed),
                    });
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::skewness;

    fn spec(polarity: Polarity) -> VoiceSpec {
        VoiceSpec::new(120.0, VOWELS[0].1.to_vec(), polarity, 3)
    }

    #[test]
    fn positive_source_has_negative_closure_peaks() {
        let s = glottal_source(&spec(Polarity::Positive), 16000).unwrap();
        let x = s.samples();
        let period = (16000.0 / 120.0) as usize;
        for chunk in x.chunks(period).take(100).filter(|c| c.len() == period) {
            let min = chunk.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(-min > max, "min {min} max {max}");
        }
        assert!(skewness(x).unwrap() < 0.0);
    }

    #[test]
    fn negative_source_is_exact_negation() {
        let p = glottal_source(&spec(Polarity::Positive), 16000).unwrap();
        let n = glottal_source(&spec(Polarity::Negative), 16000).unwrap();
        assert_eq!((-&p).samples(), n.samples());
        let pv = synthesize_voice(&spec(Polarity::Positive), 16000).unwrap();
        let nv = synthesize_voice(&spec(Polarity::Negative), 16000).unwrap();
        assert_eq!((-&pv).samples(), nv.samples());
    }

    #[test]
    fn zero_jitter_peaks_are_periodic() {
        let mut s = spec(Polarity::Positive);
        s.f0_hz = 100.0;
        s.jitter_pct = 0.0;
        s.intonation_pct = 0.0;
        s.aspiration_db = None;
        let x = glottal_source(&s, 16000).unwrap().into_samples();
        let argmins: Vec<usize> = x
            .chunks(160)
            .map(|c| {
                c.iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap()
                    .0
            })
            .enumerate()
            .map(|(i, k)| i * 160 + k)
            .collect();
        for w in argmins.windows(2) {
            assert_eq!(w[1] - w[0], 160);
        }
    }

    #[test]
    fn voice_is_peak_normalized() {
        let v = synthesize_voice(&spec(Polarity::Positive), 16000).unwrap();
        let peak = v.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak - PEAK_LEVEL).abs() < 1e-12);
        assert_eq!(v.len(), 16000);
    }

    #[test]
    fn first_formant_dominates_spectrum_near_660() {
        // Goertzel power scan of the /ae/ voice between 400 and 1200 Hz.
        let mut s = spec(Polarity::Positive);
        s.jitter_pct = 0.0;
        s.f0_hz = 110.0;
        let v = synthesize_voice(&s, 16000).unwrap();
        let x = v.samples();
        let power = |hz: f64| {
            let w = 2.0 * PI * hz / 16000.0;
            let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, &v)| {
                (re + v * (w * n as f64).cos(), im - v * (w * n as f64).sin())
            });
            re * re + im * im
        };
        let best = (400..1200)
            .step_by(5)
            .map(|hz| hz as f64)
            .max_by(|a, b| power(*a).total_cmp(&power(*b)))
            .unwrap();
        assert!((best - 660.0).abs() <= 50.0, "peak at {best}");
    }

    #[test]
    fn grid_is_complete_and_unique() {
        let g = standard_grid();
        assert_eq!(g.len(), 150);
        let mut names: Vec<_> = g.iter().map(|e| e.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 150);
    }

    #[test]
    fn rejects_invalid_specs() {
        let mut s = spec(Polarity::Positive);
        s.f0_hz = 40.0;
        assert!(glottal_source(&s, 16000).is_err());
        let mut s = spec(Polarity::Positive);
        s.formants.push((9000.0, 100.0));
        assert!(synthesize_voice(&s, 16000).is_err());
    }
}
