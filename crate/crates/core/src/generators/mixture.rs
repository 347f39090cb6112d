//! Monte Carlo negentropy generator of a mixture family.
//!
//! `G_S(eta) = (1/m) sum_i m(x_i; eta) log m(x_i; eta) / q(x_i)`.
//! Per variate only the ratios `p_j(x_i) / q(x_i)` are kept, computed from
//! log-densities, so nothing underflows in the tails.

use nalgebra::{DMatrix, DVector};

use super::{check_spd, clamp_to_simplex, ensure_domain, Generator};
use crate::error::{Error, Result};
use crate::families::{in_open_simplex, MixtureFamily, SIMPLEX_MARGIN};
use crate::reduce::tree_reduce;
use crate::sampling::{SampleCache, SampleSet};

/// One block of variates with its weight `w / m_block`.
#[derive(Debug, Clone)]
struct Shard {
    scale: f64,
    m: usize,
    /// `log p_j(x) - log q(x)`, row-major `m x (D + 1)`.
    log_ratio: Vec<f64>,
    /// `(p_j(x) - p_0(x)) / q(x)`, row-major `m x D`.
    diff: Vec<f64>,
    log_q: Vec<f64>,
}

impl Shard {
    fn new(sample: &SampleSet, components: usize, scale: f64) -> Result<Self> {
        let SampleCache::Mixture { components: k, log_p } = &sample.cache else {
            return Err(Error::Mismatch("sample cache was built for an exponential family".into()));
        };
        if *k != components {
            return Err(Error::Mismatch(format!(
                "sample cache has {k} components, family has {components}"
            )));
        }
        let m = sample.len();
        let d = components - 1;
        let mut log_ratio = Vec::with_capacity(m * components);
        let mut diff = Vec::with_capacity(m * d);
        for (i, lq) in sample.log_q.iter().enumerate() {
            let row = &log_p[i * components..(i + 1) * components];
            let r0 = (row[0] - lq).exp();
            log_ratio.extend(row.iter().map(|lp| lp - lq));
            diff.extend(row[1..].iter().map(|lp| (lp - lq).exp() - r0));
        }
        Ok(Self {
            scale,
            m,
            log_ratio,
            diff,
            log_q: sample.log_q.clone(),
        })
    }

    /// `(log(m(x_i)/q(x_i)), log m(x_i))` for variate `i`.
    #[inline]
    fn log_mix(&self, i: usize, log_w: &[f64]) -> (f64, f64) {
        let k = log_w.len();
        let row = &self.log_ratio[i * k..(i + 1) * k];
        let mut max = f64::NEG_INFINITY;
        for (lw, lr) in log_w.iter().zip(row) {
            max = max.max(lw + lr);
        }
        let s: f64 = log_w.iter().zip(row).map(|(lw, lr)| (lw + lr - max).exp()).sum();
        let lr_mix = max + s.ln();
        (lr_mix, lr_mix + self.log_q[i])
    }
}

/// Monte Carlo mixture family generator.
#[derive(Debug, Clone)]
pub struct MCMixtureGenerator {
    family: MixtureFamily,
    fingerprint: String,
    shards: Vec<Shard>,
}

/// Builds the generator on `sample`, whose cache must belong to `family`.
///
/// Rejects samples with fewer variates than the family order, families whose
/// components fail the independence check on the sample, and samples on
/// which the Hessian is not positive definite at the simplex barycenter.
pub fn build_mc_mixture_generator(
    family: &MixtureFamily,
    sample: &SampleSet,
) -> Result<MCMixtureGenerator> {
    let d = family.order();
    if sample.family != family.fingerprint() {
        return Err(Error::Mismatch(format!(
            "sample was drawn for family {}, not {}",
            sample.family,
            family.fingerprint()
        )));
    }
    if sample.len() < d {
        return Err(Error::RankDeficient { m: sample.len(), dim: d });
    }
    family.check_independence(&sample.variates[..sample.len().min(10_000)])?;
    let shard = Shard::new(sample, d + 1, 1.0 / sample.len() as f64)?;
    let gen = MCMixtureGenerator {
        family: family.clone(),
        fingerprint: family.fingerprint(),
        shards: vec![shard],
    };
    let center = gen.interior_point();
    check_spd(&gen.hessian(&center)?).map_err(|e| {
        Error::Degenerate(format!("Hessian at the simplex barycenter: {e}"))
    })?;
    Ok(gen)
}

impl MCMixtureGenerator {
    pub fn family(&self) -> &MixtureFamily {
        &self.family
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Total number of variates across all blocks.
    pub fn sample_size(&self) -> usize {
        self.shards.iter().map(|s| s.m).sum()
    }

    pub(crate) fn from_parts(parts: &[(&MCMixtureGenerator, f64)]) -> Self {
        let first = parts[0].0;
        let shards = parts
            .iter()
            .flat_map(|(g, w)| {
                g.shards.iter().map(move |s| Shard {
                    scale: s.scale * w,
                    ..s.clone()
                })
            })
            .collect();
        Self {
            family: first.family.clone(),
            fingerprint: first.fingerprint.clone(),
            shards,
        }
    }

    fn log_weights(&self, eta: &DVector<f64>) -> Vec<f64> {
        let mut lw = Vec::with_capacity(eta.len() + 1);
        lw.push((1.0 - eta.sum()).ln());
        lw.extend(eta.iter().map(|v| v.ln()));
        lw
    }
}

impl Generator for MCMixtureGenerator {
    fn dim(&self) -> usize {
        self.family.order()
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim() && in_open_simplex(x, SIMPLEX_MARGIN)
    }

    fn value(&self, eta: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, eta)?;
        let lw = self.log_weights(eta);
        let mut total = 0.0;
        for s in &self.shards {
            let sum = tree_reduce(
                s.m,
                || 0.0,
                |acc, i| {
                    let (lr, lm) = s.log_mix(i, &lw);
                    *acc += lr.exp() * lm;
                },
                |a, b| a + b,
            );
            total += s.scale * sum;
        }
        Ok(total)
    }

    fn gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, eta)?;
        let d = self.dim();
        let lw = self.log_weights(eta);
        let mut total = DVector::zeros(d);
        for s in &self.shards {
            let sum = tree_reduce(
                s.m,
                || vec![0.0; d],
                |acc, i| {
                    let (_, lm) = s.log_mix(i, &lw);
                    let f = 1.0 + lm;
                    for (a, df) in acc.iter_mut().zip(&s.diff[i * d..(i + 1) * d]) {
                        *a += df * f;
                    }
                },
                add_vecs,
            );
            total += DVector::from_vec(sum) * s.scale;
        }
        Ok(total)
    }

    fn hessian(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, eta)?;
        let d = self.dim();
        let lw = self.log_weights(eta);
        let mut total = DMatrix::zeros(d, d);
        for s in &self.shards {
            // Upper triangle, packed row by row.
            let sum = tree_reduce(
                s.m,
                || vec![0.0; d * (d + 1) / 2],
                |acc, i| {
                    let (lr, _) = s.log_mix(i, &lw);
                    let inv = (-lr).exp();
                    let row = &s.diff[i * d..(i + 1) * d];
                    let mut k = 0;
                    for (a, ra) in row.iter().enumerate() {
                        let va = ra * inv;
                        for rb in &row[a..] {
                            acc[k] += va * rb;
                            k += 1;
                        }
                    }
                },
                add_vecs,
            );
            let mut k = 0;
            for a in 0..d {
                for b in a..d {
                    let v = s.scale * sum[k];
                    total[(a, b)] += v;
                    if a != b {
                        total[(b, a)] += v;
                    }
                    k += 1;
                }
            }
        }
        Ok(total)
    }

    fn interior_point(&self) -> DVector<f64> {
        let d = self.dim();
        DVector::from_element(d, 1.0 / (d + 1) as f64)
    }

    fn name(&self) -> String {
        format!("mc-mixture[{} variates]", self.sample_size())
    }

    fn clamp_interior(&self, x: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
        clamp_to_simplex(x, margin)
    }
}

pub(crate) fn add_vecs(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
