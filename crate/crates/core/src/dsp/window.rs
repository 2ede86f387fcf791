use std::f64::consts::PI;

/// Symmetric `n`-point Hann taper, zero at both ends for `n >= 2`.
pub fn hanning_window(n: usize) -> Vec<f64> {
    assert!(n >= 1, "window length must be positive");
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / denom).cos()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_windows() {
        assert_eq!(hanning_window(1), vec![1.0]);
        let w3 = hanning_window(3);
        assert_eq!(w3[0], 0.0);
        assert!((w3[1] - 1.0).abs() < 1e-15);
        assert!(w3[2].abs() < 1e-15);
        let w5 = hanning_window(5);
        for (got, want) in w5.iter().zip([0.0, 0.5, 1.0, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn symmetric() {
        let w = hanning_window(400);
        for k in 0..200 {
            assert!((w[k] - w[399 - k]).abs() < 1e-12);
        }
    }
}
