//! Monte Carlo cumulant generator of an exponential family.
//!
//! The importance-sampled log-normalizer
//! `F†(theta) = log((1/m) sum_i exp(<t(x_i), theta> + k(x_i) - log q(x_i)))`
//! is rewritten around a reference variate `r` as
//! `F†(theta) = lse0p(<a_i, theta> + b_i, i != r) + <t(x_r), theta> + c`
//! with `a_i = t(x_i) - t(x_r)`, `b_i = k(x_i) - k(x_r) - log q(x_i) + log q(x_r)`
//! and `c = k(x_r) - log q(x_r) - log m`. The generator exposes the lse0p part;
//! the dropped affine term is kept so `F†` can be rebuilt.

use nalgebra::{DMatrix, DVector};

use super::{check_spd, ensure_domain, Generator};
use super::mixture::add_vecs;
use crate::error::{Error, Result};
use crate::families::ExponentialFamily;
use crate::reduce::{tree_max, tree_reduce};
use crate::sampling::{SampleCache, SampleSet};

/// The affine term removed from `F†`: `F† = F + <slope, theta> + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTerm {
    pub slope: DVector<f64>,
    pub offset: f64,
}

/// Monte Carlo exponential family generator, `lse0p(<a_i, theta> + b_i)`.
#[derive(Debug, Clone)]
pub struct MCExponentialGenerator {
    dim: usize,
    /// Row-major `(m - 1) x D`.
    a: Vec<f64>,
    b: Vec<f64>,
    reference: Option<usize>,
    affine: Option<AffineTerm>,
    fingerprint: Option<String>,
    sample_size: usize,
}

/// Index minimizing `sum_j t_j(x_i)`; ties go to the lowest index.
pub fn reference_index(sample: &SampleSet) -> Result<usize> {
    let SampleCache::Exponential { order, t, .. } = &sample.cache else {
        return Err(Error::Mismatch("sample cache was built for a mixture family".into()));
    };
    let mut best = 0;
    let mut best_sum = f64::INFINITY;
    for (i, row) in t.chunks(*order).enumerate() {
        let s: f64 = row.iter().sum();
        if s < best_sum {
            best = i;
            best_sum = s;
        }
    }
    Ok(best)
}

/// Builds the generator with the default reference index.
pub fn build_mc_exponential_generator(
    family: &ExponentialFamily,
    sample: &SampleSet,
) -> Result<MCExponentialGenerator> {
    let r = reference_index(sample)?;
    MCExponentialGenerator::with_reference(family, sample, r)
}

impl MCExponentialGenerator {
    /// Builds the generator around an explicit reference variate.
    pub fn with_reference(
        family: &ExponentialFamily,
        sample: &SampleSet,
        reference: usize,
    ) -> Result<Self> {
        if sample.family != family.fingerprint() {
            return Err(Error::Mismatch(format!(
                "sample was drawn for family {}, not {}",
                sample.family,
                family.fingerprint()
            )));
        }
        let SampleCache::Exponential { order, t, k } = &sample.cache else {
            return Err(Error::Mismatch("sample cache was built for a mixture family".into()));
        };
        let d = *order;
        if d != family.order() {
            return Err(Error::Mismatch("sample cache order differs from the family".into()));
        }
        let m = sample.len();
        if m < 2 {
            return Err(Error::Precondition(
                "the exponential generator needs at least two variates".into(),
            ));
        }
        if reference >= m {
            return Err(Error::Precondition(format!(
                "reference index {reference} out of range for {m} variates"
            )));
        }
        let tr = &t[reference * d..(reference + 1) * d];
        let base = k[reference] - sample.log_q[reference];
        let mut a = Vec::with_capacity((m - 1) * d);
        let mut b = Vec::with_capacity(m - 1);
        for i in (0..m).filter(|&i| i != reference) {
            a.extend(t[i * d..(i + 1) * d].iter().zip(tr).map(|(ti, tr)| ti - tr));
            b.push(k[i] - sample.log_q[i] - base);
        }
        let gen = Self {
            dim: d,
            a,
            b,
            reference: Some(reference),
            affine: Some(AffineTerm {
                slope: DVector::from_column_slice(tr),
                offset: base - (m as f64).ln(),
            }),
            fingerprint: Some(family.fingerprint()),
            sample_size: m,
        };
        gen.check_nondegenerate()?;
        Ok(gen)
    }

    /// A bare `lse0p(<a_i, theta> + b_i)` generator with no sample behind it.
    /// `a` is row-major with `dim` columns.
    pub fn from_coefficients(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 || a.len() != dim * b.len() || b.is_empty() {
            return Err(Error::Precondition("coefficient shapes do not match".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        let gen = Self {
            dim,
            sample_size: b.len() + 1,
            a,
            b,
            reference: None,
            affine: None,
            fingerprint: None,
        };
        gen.check_nondegenerate()?;
        Ok(gen)
    }

    fn check_nondegenerate(&self) -> Result<()> {
        // The Hessian has the rank of the (m - 1) x D matrix of offsets a_i.
        if self.b.len() < self.dim {
            return Err(Error::RankDeficient {
                m: self.sample_size,
                dim: self.dim,
            });
        }
        if self.a.iter().all(|v| *v == 0.0) {
            return Err(Error::Degenerate(
                "all variates share one sufficient statistic value".into(),
            ));
        }
        let origin = DVector::zeros(self.dim);
        check_spd(&self.hessian(&origin)?)
            .map_err(|e| Error::Degenerate(format!("Hessian at the origin: {e}")))
    }

    pub fn reference(&self) -> Option<usize> {
        self.reference
    }

    pub fn affine_term(&self) -> Option<&AffineTerm> {
        self.affine.as_ref()
    }

    pub fn fingerprint(&self) -> Option<&str> {
        self.fingerprint.as_deref()
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    fn affine_or_err(&self) -> Result<&AffineTerm> {
        self.affine.as_ref().ok_or_else(|| {
            Error::Precondition("generator carries no affine reconstruction data".into())
        })
    }

    /// The un-shifted importance-sampling estimate `F†(theta)`.
    pub fn value_dagger(&self, theta: &DVector<f64>) -> Result<f64> {
        let aff = self.affine_or_err()?;
        Ok(self.value(theta)? + aff.slope.dot(theta) + aff.offset)
    }

    pub fn gradient_dagger(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let aff = self.affine_or_err()?;
        Ok(self.gradient(theta)? + &aff.slope)
    }

    #[inline]
    fn exponent(&self, i: usize, theta: &[f64]) -> f64 {
        let d = self.dim;
        self.a[i * d..(i + 1) * d]
            .iter()
            .zip(theta)
            .fold(self.b[i], |acc, (a, t)| a.mul_add(*t, acc))
    }

    /// lse0p of the exponents, with the same fixed reduction tree as the derivatives.
    fn lse0p_at(&self, theta: &[f64]) -> f64 {
        let n = self.b.len();
        let max = tree_max(n, |i| self.exponent(i, theta)).max(0.0);
        let sum = tree_reduce(
            n,
            || 0.0,
            |acc, i| *acc += (self.exponent(i, theta) - max).exp(),
            |x, y| x + y,
        );
        max + ((-max).exp() + sum).ln()
    }

    /// Softmax-weighted mean of the `a_i` (the gradient), given `F(theta)`.
    fn weighted_mean(&self, theta: &[f64], total: f64) -> DVector<f64> {
        let d = self.dim;
        let sum = tree_reduce(
            self.b.len(),
            || vec![0.0; d],
            |acc, i| {
                let w = (self.exponent(i, theta) - total).exp();
                for (s, a) in acc.iter_mut().zip(&self.a[i * d..(i + 1) * d]) {
                    *s += w * a;
                }
            },
            add_vecs,
        );
        DVector::from_vec(sum)
    }
}

impl Generator for MCExponentialGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim && x.iter().all(|v| v.is_finite())
    }

    fn value(&self, theta: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, theta)?;
        Ok(self.lse0p_at(theta.as_slice()))
    }

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, theta)?;
        let total = self.lse0p_at(theta.as_slice());
        Ok(self.weighted_mean(theta.as_slice(), total))
    }

    /// Weighted covariance of the `a_i` under the softmax0+ weights, with the
    /// reference variate (`a = 0`) carrying weight `exp(-F)`. Written as a sum
    /// of centered outer products, so it is positive semidefinite term by term.
    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, theta)?;
        let d = self.dim;
        let th = theta.as_slice();
        let total = self.lse0p_at(th);
        let mean = self.weighted_mean(th, total);
        let mean_s = mean.as_slice();
        let packed = tree_reduce(
            self.b.len(),
            || vec![0.0; d * (d + 1) / 2],
            |acc, i| {
                let w = (self.exponent(i, th) - total).exp();
                let row = &self.a[i * d..(i + 1) * d];
                let mut k = 0;
                for p in 0..d {
                    let cp = w * (row[p] - mean_s[p]);
                    for q in p..d {
                        acc[k] += cp * (row[q] - mean_s[q]);
                        k += 1;
                    }
                }
            },
            add_vecs,
        );
        let w0 = (-total).exp();
        let mut h = DMatrix::zeros(d, d);
        let mut k = 0;
        for p in 0..d {
            for q in p..d {
                let v = packed[k] + w0 * mean[p] * mean[q];
                h[(p, q)] = v;
                h[(q, p)] = v;
                k += 1;
            }
        }
        Ok(h)
    }

    fn interior_point(&self) -> DVector<f64> {
        DVector::zeros(self.dim)
    }

    fn name(&self) -> String {
        format!("mc-exponential[{} variates]", self.sample_size)
    }
}
