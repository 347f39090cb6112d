//! Adaptive Gauss–Kronrod quadrature used by the ground-truth oracles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Absolute tolerance used by every oracle integral.
pub const ORACLE_ABS_TOL: f64 = 1e-10;
/// Integrands are truncated where they fall below this fraction of their peak.
pub const TRUNCATION_RATIO: f64 = 1e-16;

const MAX_INTERVALS: usize = 20_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Quadrature(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]` starting from the given subdivision points.
///
/// Segments with the largest error estimate are bisected until the summed
/// error estimate is below `abs_tol`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::Quadrature("need at least two distinct break points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    for w in pts.windows(2) {
        let s = gk15(&f, w[0], w[1])?;
        total_err += s.error;
        heap.push(s);
    }
    while total_err > abs_tol {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence after {MAX_INTERVALS} segments (error estimate {total_err:e})"
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature("segment width underflow".into()));
        }
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Guard against drift in the running error sum.
        if total_err <= abs_tol {
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let mut values: Vec<f64> = heap.into_iter().map(|s| s.value).collect();
    values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    Ok(values.iter().sum())
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], abs_tol)
}

/// Finds a symmetric window `[center - L, center + L]` outside which `|f|`
/// stays below [`TRUNCATION_RATIO`] times its peak, probing outwards on a
/// geometric grid. Fails when the integrand does not decay.
pub fn truncation_window<F: Fn(f64) -> f64>(f: &F, center: f64, scale: f64) -> Result<f64> {
    let mut peak: f64 = 0.0;
    let n = 400;
    for i in 0..=n {
        let x = center + scale * 8.0 * (2.0 * i as f64 / n as f64 - 1.0);
        let v = f(x).abs();
        if v.is_finite() {
            peak = peak.max(v);
        }
    }
    if peak == 0.0 {
        return Err(Error::Quadrature("integrand vanishes on the probe grid".into()));
    }
    let mut half = scale;
    let step = scale * 16.0 / n as f64;
    for i in 0..=n {
        let x = center + scale * 8.0 * (2.0 * i as f64 / n as f64 - 1.0);
        let v = f(x).abs();
        if v.is_nan() || v > TRUNCATION_RATIO * peak {
            half = half.max((x - center).abs() + step);
        }
    }
    for _ in 0..200 {
        let lo = f(center - half).abs();
        let hi = f(center + half).abs();
        if lo.is_finite() && hi.is_finite() {
            peak = peak.max(lo).max(hi);
            // Require the decay to persist one doubling further out.
            let lo2 = f(center - 2.0 * half).abs();
            let hi2 = f(center + 2.0 * half).abs();
            let limit = TRUNCATION_RATIO * peak;
            if lo <= limit && hi <= limit && lo2 <= limit && hi2 <= limit {
                return Ok(half);
            }
        }
        half *= 2.0;
        if !half.is_finite() || half > 1e150 {
            break;
        }
    }
    Err(Error::Quadrature("integrand does not decay; integral diverges".into()))
}

/// Integrates over the real line by truncation, with a geometric initial
/// subdivision so that narrow features near `center` are resolved.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    extra_breaks: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    let half = truncation_window(&f, center, scale)?;
    let mut breaks = vec![center - half, center, center + half];
    let mut step = scale / 4.0;
    while step < half {
        breaks.push(center - step);
        breaks.push(center + step);
        step *= 2.0;
    }
    breaks.extend(
        extra_breaks
            .iter()
            .copied()
            .filter(|x| (x - center).abs() < half),
    );
    integrate_with_breaks(f, &breaks, abs_tol)
}
