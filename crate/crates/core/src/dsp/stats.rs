use crate::error::{Error, Result};

/// Sample skewness: third central moment over the 3/2 power of the second,
/// both normalized by `1/N`.
pub fn skewness(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (m2, m3) = x.iter().fold((0.0, 0.0), |(m2, m3), &v| {
        let d = v - mean;
        let d2 = d * d;
        (m2 + d2, m3 + d2 * d)
    });
    let m2 = m2 / n;
    let m3 = m3 / n;
    if m2 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(m3 / (m2 * m2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_is_zero() {
        assert_eq!(skewness(&[-1.0, 0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_value() {
        let s = skewness(&[0.0, 0.0, 1.0]).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(skewness(&[1.0]), Err(Error::TooShort { .. })));
        assert!(matches!(skewness(&[]), Err(Error::TooShort { .. })));
        assert!(matches!(skewness(&[2.0; 10]), Err(Error::ZeroVariance)));
    }

    fn nonconstant() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 3..200).prop_filter("nonconstant", |v| {
            v.iter().any(|&x| (x - v[0]).abs() > 1e-3)
        })
    }

    proptest! {
        #[test]
        fn odd_symmetry(x in nonconstant()) {
            let s = skewness(&x).unwrap();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let sn = skewness(&neg).unwrap();
            prop_assert!((s + sn).abs() <= 1e-12 * s.abs().max(1e-300));
        }

        #[test]
        fn scale_invariance(x in nonconstant(), c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
            let s = skewness(&x).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let sc = skewness(&scaled).unwrap();
            prop_assert!((sc - c.signum() * s).abs() <= 1e-9 * s.abs().max(1e-6));
        }

        #[test]
        fn shift_invariance(x in nonconstant(), c in -50.0f64..50.0) {
            let s = skewness(&x).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let ss = skewness(&shifted).unwrap();
            prop_assert!((ss - s).abs() <= 1e-9 * s.abs().max(1e-6));
        }
    }
}
