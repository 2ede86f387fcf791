//! Elliptic (Cauer) high-pass design.
//!
//! The analog low-pass prototype is built from Jacobi elliptic functions
//! evaluated through descending Landen transformations, mapped to a
//! high-pass at the prewarped edge and discretized with the bilinear
//! transform. The result is kept as cascaded second-order sections.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dsp::{filter::lfilter_in_place, IirCoeffs};
use crate::error::{Error, Result};
use crate::signal::Signal;

const MAX_ORDER: usize = 32;
const LANDEN_MAX_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EllipticSpec {
    pub order: usize,
    /// Passband edge in Hz.
    pub cutoff_hz: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub sample_rate: u32,
}

impl EllipticSpec {
    pub const DEFAULT_ORDER: usize = 9;
    pub const DEFAULT_RIPPLE_DB: f64 = 0.5;
    pub const DEFAULT_ATTEN_DB: f64 = 60.0;

    pub fn highpass(cutoff_hz: f64, sample_rate: u32) -> Self {
        Self {
            order: Self::DEFAULT_ORDER,
            cutoff_hz,
            passband_ripple_db: Self::DEFAULT_RIPPLE_DB,
            stopband_atten_db: Self::DEFAULT_ATTEN_DB,
            sample_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < nyquist) {
            return Err(Error::InvalidSpec(format!(
                "cutoff {} Hz outside (0, {nyquist})",
                self.cutoff_hz
            )));
        }
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(Error::InvalidSpec(format!(
                "order {} unsupported (1..={MAX_ORDER})",
                self.order
            )));
        }
        if self.passband_ripple_db.is_nan()
            || self.stopband_atten_db.is_nan()
            || self.passband_ripple_db <= 0.0
            || self.stopband_atten_db <= self.passband_ripple_db
        {
            return Err(Error::InvalidSpec(format!(
                "need 0 < ripple ({}) < attenuation ({})",
                self.passband_ripple_db, self.stopband_atten_db
            )));
        }
        Ok(())
    }
}

/// One biquad `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Section>,
}

impl SosFilter {
    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// Causal filtering through every section in turn, zero initial state.
    pub fn apply(&self, x: &Signal) -> Signal {
        let mut y = x.samples().to_vec();
        for s in &self.sections {
            let mut state = [0.0; 2];
            lfilter_in_place(&s.b, &s.a, &mut y, &mut state);
        }
        Signal::from_trusted(y, x.sample_rate())
    }

    /// Expands the cascade into a single transfer function.
    pub fn to_iir_coeffs(&self) -> IirCoeffs {
        let (b, a) = self
            .sections
            .iter()
            .fold((vec![1.0], vec![1.0]), |(b, a), s| {
                (poly_mul(&b, &s.b), poly_mul(&a, &s.a))
            });
        IirCoeffs::new(trim_trailing_zeros(b), trim_trailing_zeros(a))
            .expect("cascade has a[0] == 1")
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| {
                let num = s.b[0] + z_inv * (s.b[1] + z_inv * s.b[2]);
                let den = s.a[0] + z_inv * (s.a[1] + z_inv * s.a[2]);
                acc * num / den
            })
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections
            .iter()
            .flat_map(|s| quadratic_roots(s.a[1], s.a[2]))
            .collect()
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn trim_trailing_zeros(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && p[p.len() - 1] == 0.0 {
        p.pop();
    }
    p
}

/// Roots of `z^2 + a1 z + a2`, or of `z + a1` when `a2 == 0`.
fn quadratic_roots(a1: f64, a2: f64) -> Vec<Complex64> {
    if a2 == 0.0 {
        return vec![Complex64::new(-a1, 0.0)];
    }
    let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
    vec![(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
}

/// Descending Landen sequence for modulus `k` with known complement `kp`.
fn landen(k: f64, kp: f64) -> Vec<f64> {
    let mut seq = Vec::new();
    let (mut k, mut kp) = (k, kp);
    for _ in 0..LANDEN_MAX_STEPS {
        if k <= f64::EPSILON {
            break;
        }
        k = (k / (1.0 + kp)).powi(2);
        kp = (1.0 - k * k).sqrt();
        seq.push(k);
    }
    seq
}

/// `cd(u K, k)` via ascending Landen recursion.
fn cde(u: Complex64, seq: &[f64]) -> Complex64 {
    ascend((u * PI / 2.0).cos(), seq)
}

/// `sn(u K, k)` via ascending Landen recursion.
fn sne(u: Complex64, seq: &[f64]) -> Complex64 {
    ascend((u * PI / 2.0).sin(), seq)
}

fn ascend(mut w: Complex64, seq: &[f64]) -> Complex64 {
    for &v in seq.iter().rev() {
        w = (1.0 + v) * w / (1.0 + v * w * w);
    }
    w
}

/// Inverse of [`sne`]: returns `u` with `sn(u K, k) = w`.
fn asne(w: Complex64, k: f64, seq: &[f64]) -> Complex64 {
    let mut w = w;
    let mut prev = k;
    for &v in seq {
        w = w / (1.0 + (1.0 - w * w * prev * prev).sqrt()) * 2.0 / (1.0 + v);
        prev = v;
    }
    1.0 - w.acos() * 2.0 / PI
}

/// Analog low-pass prototype (passband edge 1 rad/s): zeros (upper half
/// plane only), complex poles (upper half plane only), and the real pole
/// for odd orders.
struct Prototype {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    real_pole: Option<f64>,
}

fn elliptic_prototype(order: usize, ripple_db: f64, atten_db: f64) -> Prototype {
    let eps_p = (10f64.powf(ripple_db / 10.0) - 1.0).sqrt();
    let eps_s = (10f64.powf(atten_db / 10.0) - 1.0).sqrt();
    let k1 = eps_p / eps_s;
    let k1p = (1.0 - k1 * k1).sqrt();

    let half = order / 2;
    let u: Vec<f64> = (1..=half)
        .map(|i| (2 * i - 1) as f64 / order as f64)
        .collect();

    // Degree equation: selectivity modulus k from the discrimination k1.
    let seq_k1p = landen(k1p, k1);
    let kp = k1p.powi(order as i32)
        * u.iter()
            .map(|&ui| sne(Complex64::new(ui, 0.0), &seq_k1p).re.powi(4))
            .product::<f64>();
    let k = (1.0 - kp * kp).sqrt();
    let seq_k = landen(k, kp);
    let seq_k1 = landen(k1, k1p);

    let j = Complex64::i();
    let v0 = (-j * asne(j / eps_p, k1, &seq_k1) / order as f64).re;

    let zeros = u
        .iter()
        .map(|&ui| j / (k * cde(Complex64::new(ui, 0.0), &seq_k)))
        .collect();
    let poles = u
        .iter()
        .map(|&ui| j * cde(Complex64::new(ui, -v0), &seq_k))
        .collect();
    let real_pole = (order % 2 == 1).then(|| (j * sne(j * v0, &seq_k)).re);
    Prototype {
        zeros,
        poles,
        real_pole,
    }
}

/// Designs a causal elliptic high-pass filter with passband edge at
/// `spec.cutoff_hz`.
pub fn design_elliptic_highpass(spec: &EllipticSpec) -> Result<SosFilter> {
    spec.validate()?;
    let proto = elliptic_prototype(spec.order, spec.passband_ripple_db, spec.stopband_atten_db);
    // Bilinear transform s = (z - 1)/(z + 1) with the edge prewarped.
    let edge = (PI * spec.cutoff_hz / spec.sample_rate as f64).tan();
    let bilinear = |s: Complex64| (1.0 + s) / (1.0 - s);

    let mut pole_pairs: Vec<Complex64> = proto.poles.iter().map(|&p| bilinear(edge / p)).collect();
    let mut zero_pairs: Vec<Complex64> = proto.zeros.iter().map(|&z| bilinear(edge / z)).collect();

    // Pair the poles nearest the unit circle with the zeros nearest them.
    pole_pairs.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mut sections = Vec::with_capacity(spec.order.div_ceil(2));
    for p in pole_pairs {
        let idx = zero_pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (**a - p).norm().total_cmp(&(**b - p).norm()))
            .map(|(i, _)| i)
            .expect("one zero pair per pole pair");
        let z = zero_pairs.swap_remove(idx);
        sections.push(Section {
            b: [1.0, -2.0 * z.re, z.norm_sqr()],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        });
    }
    if let Some(p0) = proto.real_pole {
        // The odd-order real pole maps to a real pole; its zero at infinity
        // maps to DC after the high-pass transform.
        let pd = bilinear(Complex64::new(edge / p0, 0.0)).re;
        sections.push(Section {
            b: [1.0, -1.0, 0.0],
            a: [1.0, -pd, 0.0],
        });
    }

    let mut filter = SosFilter { sections };
    let target = if spec.order % 2 == 1 {
        1.0
    } else {
        10f64.powf(-spec.passband_ripple_db / 20.0)
    };
    let gain = target / filter.response(PI).norm();
    for c in filter.sections[0].b.iter_mut() {
        *c *= gain;
    }
    Ok(filter)
}
