//! Combining generators built on the blocks of a partitioned sample.
//!
//! Mixture generators combine by a weighted arithmetic mean. Exponential
//! generators combine by an exponential (log-sum-exp) mean of their
//! un-shifted estimates `F†`.

use nalgebra::{DMatrix, DVector};

use super::{ensure_domain, Generator, MCExponentialGenerator, MCMixtureGenerator};
use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in weights {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Precondition(format!("aggregation weight {w} is not positive")));
        }
        total += w;
    }
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Precondition(format!(
            "aggregation weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// `G_S = sum_i w_i G_{S_i}` with `w_i = |S_i| / |S|`.
pub fn aggregate_mixture_generators(
    parts: &[(&MCMixtureGenerator, f64)],
) -> Result<MCMixtureGenerator> {
    let Some((first, _)) = parts.first() else {
        return Err(Error::Precondition("no generators to aggregate".into()));
    };
    if let Some((g, _)) = parts.iter().find(|(g, _)| g.fingerprint() != first.fingerprint()) {
        return Err(Error::Mismatch(format!(
            "generators over families {} and {}",
            first.fingerprint(),
            g.fingerprint()
        )));
    }
    check_weights(parts.iter().map(|(_, w)| *w))?;
    Ok(MCMixtureGenerator::from_parts(parts))
}

/// `F†_S = log sum_i w_i exp(F†_{S_i})`.
#[derive(Debug, Clone)]
pub struct ExponentialAggregate {
    parts: Vec<(MCExponentialGenerator, f64)>,
    dim: usize,
}

pub fn aggregate_exponential_generators(
    parts: &[(&MCExponentialGenerator, f64)],
) -> Result<ExponentialAggregate> {
    let Some((first, _)) = parts.first() else {
        return Err(Error::Precondition("no generators to aggregate".into()));
    };
    for (g, _) in parts {
        if g.affine_term().is_none() {
            return Err(Error::Precondition(
                "a part carries no affine reconstruction data".into(),
            ));
        }
        if g.fingerprint() != first.fingerprint() || g.dim() != first.dim() {
            return Err(Error::Mismatch("parts belong to different families".into()));
        }
    }
    check_weights(parts.iter().map(|(_, w)| *w))?;
    Ok(ExponentialAggregate {
        parts: parts.iter().map(|(g, w)| ((*g).clone(), w.ln())).collect(),
        dim: first.dim(),
    })
}

impl ExponentialAggregate {
    /// Log-weighted part values and their log-sum-exp.
    fn mix(&self, theta: &DVector<f64>) -> Result<(Vec<f64>, f64)> {
        let logs = self
            .parts
            .iter()
            .map(|(g, lw)| Ok(lw + g.value_dagger(theta)?))
            .collect::<Result<Vec<_>>>()?;
        let total = super::lse::log_sum_exp(&logs);
        Ok((logs, total))
    }
}

impl Generator for ExponentialAggregate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim && x.iter().all(|v| v.is_finite())
    }

    fn value(&self, theta: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, theta)?;
        Ok(self.mix(theta)?.1)
    }

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, theta)?;
        let (logs, total) = self.mix(theta)?;
        let mut g = DVector::zeros(self.dim);
        for ((part, _), l) in self.parts.iter().zip(&logs) {
            g += part.gradient_dagger(theta)? * (l - total).exp();
        }
        Ok(g)
    }

    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, theta)?;
        let (logs, total) = self.mix(theta)?;
        let weights: Vec<f64> = logs.iter().map(|l| (l - total).exp()).collect();
        let grads = self
            .parts
            .iter()
            .map(|(p, _)| p.gradient_dagger(theta))
            .collect::<Result<Vec<_>>>()?;
        let mean = grads
            .iter()
            .zip(&weights)
            .fold(DVector::zeros(self.dim), |acc, (g, w)| acc + g * *w);
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (((part, _), g), w) in self.parts.iter().zip(&grads).zip(&weights) {
            let c = g - &mean;
            h += (part.hessian(theta)? + &c * c.transpose()) * *w;
        }
        Ok(h)
    }

    fn interior_point(&self) -> DVector<f64> {
        DVector::zeros(self.dim)
    }

    fn name(&self) -> String {
        format!("exp-mean[{} parts]", self.parts.len())
    }
}
