use crate::error::{Error, Result};

/// Relative ridge added to the zero-lag autocorrelation before solving.
pub const RIDGE: f64 = 1e-9;

/// Predictor coefficients for one analysis frame.
///
/// The inverse filter is `A(z) = 1 - sum_k coeffs[k-1] z^-k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFrame {
    pub center_index: usize,
    pub coeffs: Vec<f64>,
    /// Final prediction error energy; not used by the polarity decision.
    pub gain: Option<f64>,
}

/// Biased, unnormalized autocorrelation `R[0..=max_lag]`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= frame.len() {
        return Err(Error::LagTooLarge {
            max_lag,
            len: frame.len(),
        });
    }
    Ok((0..=max_lag)
        .map(|lag| {
            frame[..frame.len() - lag]
                .iter()
                .zip(&frame[lag..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect())
}

/// Solves the autocorrelation normal equations for `order` predictor
/// coefficients with the Levinson-Durbin recursion.
pub fn levinson_durbin(acf: &[f64], order: usize) -> Result<Vec<f64>> {
    levinson_with_error(acf, order).map(|(coeffs, _)| coeffs)
}

/// Like [`levinson_durbin`], also returning the final prediction error.
pub fn levinson_with_error(acf: &[f64], order: usize) -> Result<(Vec<f64>, f64)> {
    if acf.len() < order + 1 {
        return Err(Error::TooShort {
            needed: order + 1,
            got: acf.len(),
        });
    }
    let r0 = acf[0] * (1.0 + RIDGE);
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::SingularToeplitz { step: 0 });
    }

    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut err = r0;
    for i in 0..order {
        let mut acc = acf[i + 1];
        for j in 0..i {
            acc -= a[j] * acf[i - j];
        }
        let k = acc / err;
        if !k.is_finite() {
            return Err(Error::SingularToeplitz { step: i + 1 });
        }
        prev[..i].copy_from_slice(&a[..i]);
        for j in 0..i {
            a[j] = prev[j] - k * prev[i - 1 - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
    }
    Ok((a, err))
}
