use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Kernel length above which convolution switches to the FFT path.
const DIRECT_CONV_MAX_TAPS: usize = 64;

/// Transfer-function coefficients `B(z)/A(z)`, normalized so `a[0] == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IirCoeffs {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl IirCoeffs {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.is_empty() || a.is_empty() {
            return Err(Error::InvalidCoeffs("empty coefficient vector".into()));
        }
        if b.iter().chain(&a).any(|c| !c.is_finite()) {
            return Err(Error::InvalidCoeffs("non-finite coefficient".into()));
        }
        let a0 = a[0];
        if a0 == 0.0 {
            return Err(Error::InvalidCoeffs("a[0] is zero".into()));
        }
        if a0 == 1.0 {
            return Ok(Self { b, a });
        }
        Ok(Self {
            b: b.iter().map(|c| c / a0).collect(),
            a: a.iter().map(|c| c / a0).collect(),
        })
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Length of the transposed direct-form II state vector.
    pub fn state_len(&self) -> usize {
        self.b.len().max(self.a.len()) - 1
    }

    /// Complex response at normalized angular frequency `omega` (rad/sample).
    pub fn response(&self, omega: f64) -> Complex<f64> {
        let z_inv = Complex::from_polar(1.0, -omega);
        let eval = |p: &[f64]| {
            p.iter()
                .rev()
                .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z_inv + c)
        };
        eval(&self.b) / eval(&self.a)
    }
}

/// Runs a transposed direct-form II filter over `x` in place.
pub(crate) fn lfilter_in_place(b: &[f64], a: &[f64], x: &mut [f64], state: &mut [f64]) {
    let n = b.len().max(a.len());
    debug_assert_eq!(state.len(), n - 1);
    let coef = |p: &[f64], i: usize| p.get(i).copied().unwrap_or(0.0);
    if n == 1 {
        let b0 = b[0];
        x.iter_mut().for_each(|v| *v *= b0);
        return;
    }
    let b0 = b[0];
    for v in x.iter_mut() {
        let input = *v;
        let y = b0 * input + state[0];
        for i in 0..n - 2 {
            state[i] = coef(b, i + 1) * input - coef(a, i + 1) * y + state[i + 1];
        }
        state[n - 2] = coef(b, n - 1) * input - coef(a, n - 1) * y;
        *v = y;
    }
}

/// Causal IIR filtering. Passing the returned state back in continues the
/// filter across a segment boundary exactly as if the input were contiguous.
pub fn iir_filter(
    x: &Signal,
    coeffs: &IirCoeffs,
    initial_state: Option<&[f64]>,
) -> Result<(Signal, Vec<f64>)> {
    let mut state = match initial_state {
        Some(s) if s.len() != coeffs.state_len() => {
            return Err(Error::InvalidCoeffs(format!(
                "state has {} entries, filter needs {}",
                s.len(),
                coeffs.state_len()
            )))
        }
        Some(s) => s.to_vec(),
        None => vec![0.0; coeffs.state_len()],
    };
    let mut y = x.samples().to_vec();
    lfilter_in_place(&coeffs.b, &coeffs.a, &mut y, &mut state);
    Ok((Signal::new(y, x.sample_rate())?, state))
}

/// Linear convolution truncated to the input length.
pub fn fir_convolve(x: &Signal, h: &[f64]) -> Signal {
    assert!(!h.is_empty(), "empty kernel");
    let out = if h.len() <= DIRECT_CONV_MAX_TAPS {
        convolve_direct(x.samples(), h)
    } else {
        convolve_fft(x.samples(), h)
    };
    Signal::from_trusted(out, x.sample_rate())
}

fn convolve_direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| {
            let kmax = h.len().min(n + 1);
            (0..kmax).map(|k| h[k] * x[n - k]).sum()
        })
        .collect()
}

fn convolve_fft(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    // Only the first len(x) outputs are kept, so the tail of h beyond that is irrelevant.
    let h = &h[..h.len().min(x.len())];
    let size = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let to_buf = |v: &[f64]| {
        let mut buf = vec![Complex::new(0.0, 0.0); size];
        for (slot, &s) in buf.iter_mut().zip(v) {
            slot.re = s;
        }
        buf
    };
    let mut xb = to_buf(x);
    let mut hb = to_buf(h);
    fwd.process(&mut xb);
    fwd.process(&mut hb);
    for (a, b) in xb.iter_mut().zip(&hb) {
        *a *= b;
    }
    inv.process(&mut xb);
    let scale = 1.0 / size as f64;
    xb[..x.len()].iter().map(|c| c.re * scale).collect()
}

/// Subtracts the arithmetic mean.
pub fn remove_dc(x: &Signal) -> Signal {
    let n = x.len().max(1) as f64;
    let mean = x.samples().iter().sum::<f64>() / n;
    Signal::from_trusted(
        x.samples().iter().map(|v| v - mean).collect(),
        x.sample_rate(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec(), 16000).unwrap()
    }

    #[test]
    fn identity_filter_is_bit_exact() {
        let x = sig(&[0.1, -0.7, 3.3, 1e-300]);
        let c = IirCoeffs::new(vec![1.0], vec![1.0]).unwrap();
        let (y, state) = iir_filter(&x, &c, None).unwrap();
        assert_eq!(y.samples(), x.samples());
        assert!(state.is_empty());
    }

    #[test]
    fn differencer_kills_dc() {
        let x = sig(&[0.3; 20]);
        let c = IirCoeffs::new(vec![1.0, -1.0], vec![1.0]).unwrap();
        let (y, _) = iir_filter(&x, &c, None).unwrap();
        assert_eq!(y.samples()[0], 0.3);
        assert!(y.samples()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_pole_impulse_response() {
        let mut imp = vec![0.0; 8];
        imp[0] = 1.0;
        let c = IirCoeffs::new(vec![1.0], vec![1.0, -0.5]).unwrap();
        let (y, _) = iir_filter(&sig(&imp), &c, None).unwrap();
        for (k, v) in y.samples().iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(k as i32));
        }
    }

    #[test]
    fn normalizes_a0() {
        let c = IirCoeffs::new(vec![2.0, 4.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(c.b(), &[1.0, 2.0]);
        assert_eq!(c.a(), &[1.0, -0.5]);
        assert!(IirCoeffs::new(vec![1.0], vec![0.0, 1.0]).is_err());
        assert!(IirCoeffs::new(vec![], vec![1.0]).is_err());
    }

    #[test]
    fn wrong_state_length() {
        let c = IirCoeffs::new(vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(iir_filter(&sig(&[1.0]), &c, Some(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn convolution_examples() {
        let x = sig(&[1.0, 2.0, 3.0]);
        assert_eq!(fir_convolve(&x, &[1.0]).samples(), x.samples());
        assert_eq!(fir_convolve(&x, &[0.0, 1.0]).samples(), &[0.0, 1.0, 2.0]);
        assert_eq!(
            fir_convolve(&sig(&[1.0, 2.0]), &[1.0, 1.0]).samples(),
            &[1.0, 3.0]
        );
    }

    #[test]
    fn fft_path_matches_direct() {
        let x: Vec<f64> = (0..3000)
            .map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0)
            .collect();
        let h: Vec<f64> = (0..500)
            .map(|i| (-(i as f64) / 80.0).exp() * ((i % 7) as f64 - 3.0))
            .collect();
        let direct = convolve_direct(&x, &h);
        let fft = convolve_fft(&x, &h);
        for (a, b) in direct.iter().zip(&fft) {
            assert!((a - b).abs() < 1e-9);
        }
        // kernel longer than the signal
        let short = &x[..100];
        let long_h: Vec<f64> = h.iter().chain(&h).copied().collect();
        for (a, b) in convolve_direct(short, &long_h)
            .iter()
            .zip(&convolve_fft(short, &long_h))
        {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn dc_removal() {
        assert_eq!(
            remove_dc(&sig(&[1.0, 1.0, 1.0])).samples(),
            &[0.0, 0.0, 0.0]
        );
        assert_eq!(remove_dc(&sig(&[0.0, 2.0])).samples(), &[-1.0, 1.0]);
        let z = sig(&[0.5, -0.25, -0.25]);
        for (a, b) in remove_dc(&z).samples().iter().zip(z.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn segmented_filtering_matches_whole(
            x in prop::collection::vec(-1.0f64..1.0, 10..300),
            cuts in prop::collection::vec(0usize..300, 0..6),
        ) {
            let c = IirCoeffs::new(vec![0.2, -0.3, 0.1], vec![1.0, -1.1, 0.6, -0.1]).unwrap();
            let whole = iir_filter(&sig(&x), &c, None).unwrap().0;
            let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c % x.len()).collect();
            cuts.push(0);
            cuts.push(x.len());
            cuts.sort_unstable();
            let mut state: Option<Vec<f64>> = None;
            let mut pieces = Vec::new();
            for w in cuts.windows(2) {
                let seg = sig(&x[w[0]..w[1]]);
                let (y, s) = iir_filter(&seg, &c, state.as_deref()).unwrap();
                pieces.extend_from_slice(y.samples());
                state = Some(s);
            }
            for (a, b) in whole.samples().iter().zip(&pieces) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
