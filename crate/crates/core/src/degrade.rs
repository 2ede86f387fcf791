//! Degradation harness: additive noise at a controlled SNR and
//! image-source room reverberation parameterized by T60.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dsp::fir_convolve;
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Half-width, in taps, of the windowed-sinc fractional delay.
const SINC_HALF_WIDTH: i64 = 4;
/// Images weaker than this amplitude ratio to the direct path are skipped (-80 dB).
const IMAGE_FLOOR: f64 = 1e-4;
/// RIR length as a multiple of T60.
const RIR_LENGTH_T60: f64 = 1.5;

/// Seeded white Gaussian noise with unit variance.
pub fn white_noise(len: usize, sample_rate: u32, seed: u64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
    Signal::from_trusted(samples, sample_rate)
}

/// Gain applied to `noise` so that `clean + gain * noise` has the target SNR,
/// both powers taken over the full signals.
pub fn noise_gain(clean: &Signal, noise: &Signal, snr_db: f64) -> Result<f64> {
    if noise.len() < clean.len() {
        return Err(Error::NoiseTooShort {
            noise: noise.len(),
            clean: clean.len(),
        });
    }
    if noise.sample_rate() != clean.sample_rate() {
        return Err(Error::RateMismatch(
            clean.sample_rate(),
            noise.sample_rate(),
        ));
    }
    let p_clean = clean.power();
    let p_noise = power(&noise.samples()[..clean.len()]);
    if p_clean == 0.0 || p_noise == 0.0 {
        return Err(Error::SilentInput);
    }
    Ok((p_clean / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt())
}

fn power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Adds `noise` (truncated to the clean length, never looped) at `snr_db`.
pub fn mix_noise(clean: &Signal, noise: &Signal, snr_db: f64) -> Result<Signal> {
    let g = noise_gain(clean, noise, snr_db)?;
    let out = clean
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(c, n)| c + g * n)
        .collect();
    Signal::new(out, clean.sample_rate())
}

/// Measured SNR in dB of `mixed` relative to `clean`.
pub fn measured_snr_db(clean: &Signal, mixed: &Signal) -> f64 {
    let noise: Vec<f64> = mixed
        .samples()
        .iter()
        .zip(clean.samples())
        .map(|(m, c)| m - c)
        .collect();
    10.0 * (clean.power() / power(&noise)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub dimensions_m: [f64; 3],
    pub source_pos_m: [f64; 3],
    pub mic_pos_m: [f64; 3],
    pub t60_s: f64,
    pub speed_of_sound: f64,
    /// Optional bound on the per-axis image index; the -80 dB energy floor
    /// and the RIR length always apply.
    pub max_order: Option<u32>,
    #[serde(default)]
    pub reflection: ReflectionModel,
}

/// How the wall reflection coefficient is obtained from `t60_s`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReflectionModel {
    /// Eyring's formula only.
    Eyring,
    /// Eyring as the starting point, refined until the Schroeder decay of the
    /// generated response reaches -60 dB at `t60_s`.
    #[default]
    Calibrated,
}

impl Default for RoomSpec {
    fn default() -> Self {
        Self {
            dimensions_m: [3.0, 4.0, 5.0],
            source_pos_m: [1.0, 1.5, 1.5],
            mic_pos_m: [2.0, 2.5, 1.5],
            t60_s: 0.3,
            speed_of_sound: 343.0,
            max_order: None,
            reflection: ReflectionModel::default(),
        }
    }
}

impl RoomSpec {
    pub fn with_t60(t60_s: f64) -> Self {
        Self {
            t60_s,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidGeometry(m));
        if self
            .dimensions_m
            .iter()
            .any(|&d| !(d > 0.0 && d.is_finite()))
        {
            return fail(format!("dimensions {:?}", self.dimensions_m));
        }
        for (name, p) in [("source", self.source_pos_m), ("mic", self.mic_pos_m)] {
            if p.iter()
                .zip(&self.dimensions_m)
                .any(|(&x, &d)| !(x > 0.0 && x < d))
            {
                return fail(format!("{name} {p:?} not strictly inside the room"));
            }
        }
        if self.source_pos_m == self.mic_pos_m {
            return fail("source and mic coincide".into());
        }
        if !(self.t60_s > 0.0 && self.t60_s.is_finite()) {
            return fail(format!("T60 {}", self.t60_s));
        }
        if self.speed_of_sound.is_nan() || self.speed_of_sound <= 0.0 {
            return fail(format!("speed of sound {}", self.speed_of_sound));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.dimensions_m.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [x, y, z] = self.dimensions_m;
        2.0 * (x * y + x * z + y * z)
    }

    /// Uniform wall pressure reflection coefficient from Eyring's formula,
    /// `T60 = 24 ln(10) V / (-c S ln(1 - alpha))` with `beta = sqrt(1 - alpha)`.
    pub fn reflection_coefficient(&self) -> f64 {
        let exponent = -24.0 * 10f64.ln() * self.volume()
            / (self.speed_of_sound * self.surface() * self.t60_s);
        // 1 - alpha = exp(exponent)
        (exponent / 2.0).exp()
    }

    pub fn source_mic_distance(&self) -> f64 {
        distance(self.source_pos_m, self.mic_pos_m)
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Room impulse response taps at a given sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Rir {
    pub taps: Vec<f64>,
    pub sample_rate: u32,
}

impl Rir {
    pub fn to_signal(&self) -> Signal {
        Signal::from_trusted(self.taps.clone(), self.sample_rate)
    }
}

fn windowed_sinc(x: f64) -> f64 {
    let sinc = if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    };
    let w = 0.5 * (1.0 + (PI * x / (SINC_HALF_WIDTH as f64 + 1.0)).cos());
    sinc * w
}

/// Relative T60 tolerance at which calibration stops.
const CALIBRATION_TOL: f64 = 0.01;
const CALIBRATION_STEPS: usize = 12;

/// Image-source RIR for a shoebox room with uniform wall reflection.
pub fn image_method_rir(room: &RoomSpec, sample_rate: u32) -> Result<Rir> {
    room.validate()?;
    let eyring = room.reflection_coefficient();
    let rir = render_rir(room, sample_rate, eyring);
    if room.reflection == ReflectionModel::Eyring || eyring < 1e-6 {
        return Ok(rir);
    }
    // The measured decay time scales roughly with -1/ln(beta), so iterate
    // ln(beta) <- ln(beta) * measured / target.
    let mut ln_beta = eyring.ln();
    let mut best = rir;
    let mut best_err = f64::INFINITY;
    for _ in 0..CALIBRATION_STEPS {
        let rir = render_rir(room, sample_rate, ln_beta.exp());
        let Some(measured) = decay_crossing_s(&rir.taps, sample_rate, -60.0) else {
            // Decay never reaches -60 dB inside the window: too reverberant.
            ln_beta *= 1.5;
            continue;
        };
        let ratio = measured / room.t60_s;
        let err = (ratio - 1.0).abs();
        if err < best_err {
            best_err = err;
            best = rir;
        }
        if err < CALIBRATION_TOL {
            break;
        }
        ln_beta *= ratio;
    }
    Ok(best)
}

fn render_rir(room: &RoomSpec, sample_rate: u32, beta: f64) -> Rir {
    let fs = sample_rate as f64;
    let c = room.speed_of_sound;
    let direct_dist = room.source_mic_distance();
    let direct_amp = 1.0 / (4.0 * PI * direct_dist);
    let direct_delay = direct_dist / c * fs;

    let len = ((RIR_LENGTH_T60 * room.t60_s * fs).ceil() as usize)
        .max(direct_delay.ceil() as usize + SINC_HALF_WIDTH as usize + 1);
    let max_dist = (len as f64 + SINC_HALF_WIDTH as f64) / fs * c;
    let mut taps = vec![0.0; len];

    let [lx, ly, lz] = room.dimensions_m;
    let bound = |l: f64| {
        let n = (max_dist / (2.0 * l)).ceil() as i64 + 1;
        match room.max_order {
            Some(m) => n.min(m as i64),
            None => n,
        }
    };
    let (nx_max, ny_max, nz_max) = (bound(lx), bound(ly), bound(lz));
    let src = room.source_pos_m;
    let mic = room.mic_pos_m;

    // Per axis: image coordinate offset and wall-hit count for (n, mirror).
    let axis = |n: i64, q: i64, s: f64, l: f64| {
        let pos = (1 - 2 * q) as f64 * s + 2.0 * n as f64 * l;
        let hits = (n - q).abs() + n.abs();
        (pos, hits)
    };

    for nx in -nx_max..=nx_max {
        for ny in -ny_max..=ny_max {
            for nz in -nz_max..=nz_max {
                for q in 0..2 {
                    let (px, hx) = axis(nx, q, src[0], lx);
                    for j in 0..2 {
                        let (py, hy) = axis(ny, j, src[1], ly);
                        for k in 0..2 {
                            let (pz, hz) = axis(nz, k, src[2], lz);
                            let d = distance([px, py, pz], mic);
                            if d > max_dist {
                                continue;
                            }
                            let hits = (hx + hy + hz) as i32;
                            let amp = beta.powi(hits) / (4.0 * PI * d);
                            if amp < IMAGE_FLOOR * direct_amp {
                                continue;
                            }
                            add_fractional_impulse(&mut taps, d / c * fs, amp);
                        }
                    }
                }
            }
        }
    }
    Rir { taps, sample_rate }
}

fn add_fractional_impulse(taps: &mut [f64], delay: f64, amp: f64) {
    let base = delay.floor() as i64;
    for t in base - SINC_HALF_WIDTH + 1..=base + SINC_HALF_WIDTH {
        if t < 0 || t as usize >= taps.len() {
            continue;
        }
        taps[t as usize] += amp * windowed_sinc(t as f64 - delay);
    }
}

/// Convolves `clean` with the RIR, keeping the input length.
pub fn reverberate(clean: &Signal, rir: &Rir) -> Result<Signal> {
    if clean.sample_rate() != rir.sample_rate {
        return Err(Error::RateMismatch(clean.sample_rate(), rir.sample_rate));
    }
    Ok(fir_convolve(clean, &rir.taps))
}

/// Schroeder backward-integrated energy decay in dB relative to total energy.
pub fn schroeder_decay_db(taps: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut tail: Vec<f64> = taps
        .iter()
        .rev()
        .map(|v| {
            acc += v * v;
            acc
        })
        .collect();
    tail.reverse();
    let total = tail.first().copied().unwrap_or(0.0);
    tail.iter().map(|e| 10.0 * (e / total).log10()).collect()
}

/// Time in seconds at which the Schroeder curve first reaches `level_db`.
pub fn decay_crossing_s(taps: &[f64], sample_rate: u32, level_db: f64) -> Option<f64> {
    schroeder_decay_db(taps)
        .iter()
        .position(|&db| db <= level_db)
        .map(|i| i as f64 / sample_rate as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(v: Vec<f64>) -> Signal {
        Signal::new(v, 16000).unwrap()
    }

    #[test]
    fn equal_power_at_zero_db_gives_unit_gain() {
        let clean = sig(vec![1.0, -1.0, 1.0, -1.0]);
        let noise = sig(vec![-1.0, -1.0, 1.0, 1.0, 5.0]);
        assert!((noise_gain(&clean, &noise, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn very_high_snr_is_clean() {
        let clean = white_noise(1000, 16000, 1);
        let noise = white_noise(1000, 16000, 2);
        let mixed = mix_noise(&clean, &noise, 200.0).unwrap();
        let diff: f64 = mixed
            .samples()
            .iter()
            .zip(clean.samples())
            .map(|(m, c)| (m - c).powi(2))
            .sum();
        let norm: f64 = clean.samples().iter().map(|c| c * c).sum();
        assert!((diff / norm).sqrt() <= 1e-9);
    }

    #[test]
    fn noise_errors() {
        let clean = white_noise(100, 16000, 1);
        assert!(matches!(
            mix_noise(&clean, &white_noise(99, 16000, 2), 10.0),
            Err(Error::NoiseTooShort { .. })
        ));
        assert!(matches!(
            mix_noise(&clean, &sig(vec![0.0; 100]), 10.0),
            Err(Error::SilentInput)
        ));
        assert!(matches!(
            mix_noise(&sig(vec![0.0; 100]), &white_noise(100, 16000, 2), 10.0),
            Err(Error::SilentInput)
        ));
    }

    proptest! {
        #[test]
        fn achieved_snr_matches_target(seed in 0u64..10_000, snr in -10.0f64..60.0, len in 50usize..3000) {
            let clean = white_noise(len, 16000, seed);
            let noise = white_noise(len + 17, 16000, seed + 1);
            let mixed = mix_noise(&clean, &noise, snr).unwrap();
            prop_assert!((measured_snr_db(&clean, &mixed) - snr).abs() < 1e-6);
        }
    }

    #[test]
    fn noise_is_deterministic() {
        assert_eq!(white_noise(500, 16000, 9), white_noise(500, 16000, 9));
        assert_ne!(white_noise(500, 16000, 9), white_noise(500, 16000, 10));
    }

    #[test]
    fn eyring_coefficient() {
        let room = RoomSpec::with_t60(0.3);
        let beta = room.reflection_coefficient();
        let alpha = 1.0 - beta * beta;
        let t60 = 24.0 * 10f64.ln() * room.volume()
            / (-room.speed_of_sound * room.surface() * (1.0 - alpha).ln());
        assert!((t60 - 0.3).abs() < 1e-12);
        assert!(RoomSpec::with_t60(0.1).reflection_coefficient() < beta);
    }

    #[test]
    fn anechoic_limit_is_single_impulse() {
        let room = RoomSpec::with_t60(1e-4);
        assert!(room.reflection_coefficient() < 1e-100);
        let rir = image_method_rir(&room, 16000).unwrap();
        let delay = room.source_mic_distance() / 343.0 * 16000.0;
        let nonzero: Vec<usize> = (0..rir.taps.len())
            .filter(|&i| rir.taps[i] != 0.0)
            .collect();
        assert!(nonzero.len() <= 2 * SINC_HALF_WIDTH as usize);
        let peak = nonzero
            .iter()
            .copied()
            .max_by(|&a, &b| rir.taps[a].abs().total_cmp(&rir.taps[b].abs()))
            .unwrap();
        assert!((peak as f64 - delay).abs() <= 1.0);
    }

    #[test]
    fn direct_path_follows_inverse_distance() {
        // Distances chosen so the arrival falls exactly on a sample.
        let step = 343.0 / 16000.0;
        let d1 = 40.0 * step;
        let make = |d: f64| RoomSpec {
            dimensions_m: [3.0, 4.0, 5.0],
            source_pos_m: [0.5, 2.0, 2.5],
            mic_pos_m: [0.5 + d, 2.0, 2.5],
            t60_s: 1e-4,
            ..RoomSpec::default()
        };
        let peak = |d: f64| {
            let rir = image_method_rir(&make(d), 16000).unwrap();
            rir.taps.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let ratio = peak(2.0 * d1) / peak(d1);
        assert!((ratio - 0.5).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn t60_recovered_from_schroeder_decay() {
        for t60 in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let rir = image_method_rir(&RoomSpec::with_t60(t60), 16000).unwrap();
            let measured = decay_crossing_s(&rir.taps, 16000, -60.0).unwrap();
            let rel = (measured - t60).abs() / t60;
            assert!(rel < 0.15, "T60 {t60}: measured {measured:.3} s");
        }
    }

    #[test]
    fn plain_eyring_overestimates_decay_time() {
        for t60 in [0.1, 0.3, 0.5] {
            let room = RoomSpec {
                reflection: ReflectionModel::Eyring,
                ..RoomSpec::with_t60(t60)
            };
            let rir = image_method_rir(&room, 16000).unwrap();
            let measured = decay_crossing_s(&rir.taps, 16000, -60.0).unwrap();
            assert!(
                measured > t60 && measured < 1.3 * t60,
                "T60 {t60}: {measured}"
            );
        }
    }

    #[test]
    fn rir_is_deterministic_and_finite() {
        let room = RoomSpec::with_t60(0.2);
        let a = image_method_rir(&room, 16000).unwrap();
        assert_eq!(a, image_method_rir(&room, 16000).unwrap());
        assert!(a.taps.iter().all(|v| v.is_finite()));
        assert_eq!(a.taps.len(), (1.5 * 0.2 * 16000.0f64).ceil() as usize);
    }

    #[test]
    fn invalid_rooms() {
        let ok = RoomSpec::default();
        for bad in [
            RoomSpec {
                source_pos_m: [3.0, 1.0, 1.0],
                ..ok
            },
            RoomSpec {
                mic_pos_m: ok.source_pos_m,
                ..ok
            },
            RoomSpec { t60_s: 0.0, ..ok },
            RoomSpec {
                dimensions_m: [0.0, 4.0, 5.0],
                ..ok
            },
        ] {
            assert!(matches!(
                image_method_rir(&bad, 16000),
                Err(Error::InvalidGeometry(_))
            ));
        }
    }

    #[test]
    fn reverberation_properties() {
        let clean = white_noise(2000, 16000, 4);
        let mut delayed = vec![0.0; 10];
        delayed[3] = 1.0;
        let rir = Rir {
            taps: delayed,
            sample_rate: 16000,
        };
        let y = reverberate(&clean, &rir).unwrap();
        assert_eq!(&y.samples()[3..], &clean.samples()[..1997]);

        let real = image_method_rir(&RoomSpec::with_t60(0.3), 16000).unwrap();
        let y = reverberate(&clean, &real).unwrap();
        let yn = reverberate(&-&clean, &real).unwrap();
        assert_eq!((-&y).samples(), yn.samples());
        let energy = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        assert!(
            energy(y.samples())
                <= energy(clean.samples()) * energy(&real.taps) * real.taps.len() as f64
        );

        let other = Rir {
            taps: vec![1.0],
            sample_rate: 8000,
        };
        assert!(matches!(
            reverberate(&clean, &other),
            Err(Error::RateMismatch(..))
        ));
    }
}
