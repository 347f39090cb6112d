//! Log-sum-exp with an implicit zero argument, and its derivatives.
//!
//! `lse0p(x) = log(1 + sum_i exp(x_i))` is strictly convex on all of R^d,
//! unlike plain log-sum-exp which is affine along the diagonal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `log(sum_i exp(x_i))` with the max shift; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
        Some(i) => Err(Error::NonFinite {
            index: i,
            x: x[i],
            what: "lse0p argument".into(),
        }),
        None => Ok(()),
    }
}

/// `log(1 + sum exp(x_i))`. Entries equal to `-inf` contribute nothing.
pub fn lse0p(x: &[f64]) -> Result<f64> {
    check_finite(x)?;
    let max = x.iter().copied().fold(0.0_f64, f64::max);
    let tail: f64 = x.iter().map(|v| (v - max).exp()).sum();
    Ok(max + ((-max).exp() + tail).ln())
}

/// `softmax0p(x)_i = exp(x_i) / (1 + sum exp(x_k))`, the gradient of [`lse0p`].
pub fn softmax0p(x: &[f64]) -> Result<DVector<f64>> {
    let total = lse0p(x)?;
    Ok(DVector::from_iterator(x.len(), x.iter().map(|v| (v - total).exp())))
}

/// Gradient of [`lse0p`].
pub fn lse0p_grad(x: &[f64]) -> Result<DVector<f64>> {
    softmax0p(x)
}

/// Hessian of [`lse0p`]: `diag(s) - s s^T` with `s = softmax0p(x)`.
pub fn lse0p_hess(x: &[f64]) -> Result<DMatrix<f64>> {
    let s = softmax0p(x)?;
    let mut h = -(&s * s.transpose());
    for i in 0..s.len() {
        h[(i, i)] += s[i];
    }
    Ok(h)
}
