//! Seeded proposal sampling and per-variate caches.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), keyed by
//! `ChaCha8Rng::seed_from_u64(seed)`. Variate `i` of a stream is drawn from
//! ChaCha stream number `i`, starting at word 0. Every variate therefore has
//! its own counter range: drawing `0..m` in one go, drawing it block by block,
//! or drawing it on any number of threads yields the same bits.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Density, ExponentialFamily, MixtureFamily, MixtureParam};
use crate::generators::lse::log_sum_exp;

/// Name of the random stream algorithm recorded in serialized sample sets.
pub const RNG_NAME: &str = "chacha8-stream-per-variate";

/// Random stream dedicated to variate `index` of the stream keyed by `seed`.
pub fn variate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.set_word_pos(0);
    rng
}

#[derive(Debug, Clone)]
enum ProposalKind {
    Single(Arc<dyn Density>),
    Mixture {
        components: Vec<Arc<dyn Density>>,
        log_weights: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

/// Importance proposal `q(x)`: a density that can be sampled and evaluated.
#[derive(Debug, Clone)]
pub struct Proposal {
    kind: ProposalKind,
    label: String,
}

impl Proposal {
    pub fn from_density(density: Arc<dyn Density>) -> Self {
        let label = density.label();
        Self {
            kind: ProposalKind::Single(density),
            label,
        }
    }

    /// Finite mixture with the given (positive, normalized) weights.
    pub fn mixture(components: Vec<Arc<dyn Density>>, weights: &[f64]) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::Precondition(
                "proposal mixture needs one weight per component".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0))
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::Domain(format!(
                "proposal weights {weights:?} must be positive and sum to one"
            )));
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let label = format!(
            "mixture[{}]",
            components
                .iter()
                .zip(weights)
                .map(|(c, w)| format!("{w}*{}", c.label()))
                .collect::<Vec<_>>()
                .join("+")
        );
        Ok(Self {
            kind: ProposalKind::Mixture {
                log_weights: weights.iter().map(|w| w.ln()).collect(),
                components,
                cumulative,
            },
            label,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match &self.kind {
            ProposalKind::Single(d) => d.log_density(x),
            ProposalKind::Mixture {
                components,
                log_weights,
                ..
            } => {
                let terms: Vec<f64> = components
                    .iter()
                    .zip(log_weights)
                    .map(|(c, lw)| lw + c.log_density(x))
                    .collect();
                log_sum_exp(&terms)
            }
        }
    }

    /// Ancestral sampling: pick a component by weight, then draw from it.
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match &self.kind {
            ProposalKind::Single(d) => d.sample(rng),
            ProposalKind::Mixture {
                components,
                cumulative,
                ..
            } => {
                let u: f64 = rng.random();
                let idx = cumulative
                    .iter()
                    .position(|c| u < *c)
                    .unwrap_or(components.len() - 1);
                components[idx].sample(rng)
            }
        }
    }
}

impl Density for Proposal {
    fn log_density(&self, x: f64) -> f64 {
        Proposal::log_density(self, x)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        Proposal::sample(self, rng)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Equal-weight mixture of all `D + 1` components of the family.
pub fn uniform_mixture_proposal(family: &MixtureFamily) -> Proposal {
    let k = family.components().len();
    let weights = vec![1.0 / k as f64; k];
    Proposal::mixture(family.components().to_vec(), &weights)
        .expect("equal weights are valid")
}

/// The family member `m(.; eta)` used as proposal.
pub fn mixture_member_proposal(family: &MixtureFamily, eta: &MixtureParam) -> Result<Proposal> {
    if eta.dim() != family.order() {
        return Err(Error::Domain("proposal weights do not match the family order".into()));
    }
    Proposal::mixture(family.components().to_vec(), &eta.full_weights())
}

/// Which family the cache of a sample set is built for.
#[derive(Debug, Clone, Copy)]
pub enum FamilyRef<'a> {
    Mixture(&'a MixtureFamily),
    Exponential(&'a ExponentialFamily),
}

impl FamilyRef<'_> {
    pub fn fingerprint(&self) -> String {
        match self {
            FamilyRef::Mixture(f) => f.fingerprint(),
            FamilyRef::Exponential(f) => f.fingerprint(),
        }
    }
}

/// Per-variate precomputation, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleCache {
    /// `log p_j(x_i)` for `j = 0..=D`.
    Mixture { components: usize, log_p: Vec<f64> },
    /// `t(x_i)` (length `D` each) and `k(x_i)`.
    Exponential { order: usize, t: Vec<f64>, k: Vec<f64> },
}

/// An i.i.d. sample from a proposal together with cached per-variate data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub rng: String,
    pub seed: u64,
    /// Index of the first variate within the seeded stream.
    pub start: u64,
    pub proposal: String,
    pub family: String,
    pub variates: Vec<f64>,
    pub log_q: Vec<f64>,
    pub cache: SampleCache,
}

/// Draws `m` variates `0..m` of the stream keyed by `seed`.
pub fn draw_sample_set(
    proposal: &Proposal,
    m: usize,
    seed: u64,
    family: FamilyRef<'_>,
) -> Result<SampleSet> {
    draw_sample_block(proposal, 0, m, seed, family)
}

/// Draws variates `start..start + m` of the stream keyed by `seed`.
pub fn draw_sample_block(
    proposal: &Proposal,
    start: u64,
    m: usize,
    seed: u64,
    family: FamilyRef<'_>,
) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::Precondition("sample size m must be at least 1".into()));
    }
    let variates: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| proposal.sample(&mut variate_rng(seed, start + i)))
        .collect();
    let log_q: Vec<f64> = variates.par_iter().map(|&x| proposal.log_density(x)).collect();
    for (i, (&x, &lq)) in variates.iter().zip(&log_q).enumerate() {
        if !x.is_finite() || !lq.is_finite() {
            return Err(Error::NonFinite {
                index: i,
                x,
                what: "proposal log-density".into(),
            });
        }
    }
    let cache = build_cache(&variates, family)?;
    Ok(SampleSet {
        rng: RNG_NAME.to_string(),
        seed,
        start,
        proposal: proposal.label().to_string(),
        family: family.fingerprint(),
        variates,
        log_q,
        cache,
    })
}

fn build_cache(variates: &[f64], family: FamilyRef<'_>) -> Result<SampleCache> {
    let check = |values: &[f64], width: usize, what: &str| -> Result<()> {
        match values.iter().position(|v| !v.is_finite()) {
            Some(pos) => Err(Error::NonFinite {
                index: pos / width,
                x: variates[pos / width],
                what: what.to_string(),
            }),
            None => Ok(()),
        }
    };
    match family {
        FamilyRef::Mixture(fam) => {
            let k = fam.components().len();
            let log_p: Vec<f64> = variates
                .par_iter()
                .flat_map_iter(|&x| fam.component_log_densities(x))
                .collect();
            check(&log_p, k, "component log-density")?;
            Ok(SampleCache::Mixture { components: k, log_p })
        }
        FamilyRef::Exponential(fam) => {
            let d = fam.order();
            let t: Vec<f64> = variates
                .par_iter()
                .flat_map_iter(|&x| {
                    let mut row = vec![0.0; d];
                    fam.stat_into(x, &mut row);
                    row
                })
                .collect();
            check(&t, d, "sufficient statistic")?;
            let k: Vec<f64> = variates.iter().map(|&x| fam.carrier(x)).collect();
            check(&k, 1, "carrier")?;
            Ok(SampleCache::Exponential { order: d, t, k })
        }
    }
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.variates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variates.is_empty()
    }

    /// Contiguous sub-block `[from, to)`; the result keeps its stream offset.
    pub fn slice(&self, from: usize, to: usize) -> Result<SampleSet> {
        if from >= to || to > self.len() {
            return Err(Error::Precondition(format!(
                "invalid block [{from}, {to}) of a sample of size {}",
                self.len()
            )));
        }
        let cache = match &self.cache {
            SampleCache::Mixture { components, log_p } => SampleCache::Mixture {
                components: *components,
                log_p: log_p[from * components..to * components].to_vec(),
            },
            SampleCache::Exponential { order, t, k } => SampleCache::Exponential {
                order: *order,
                t: t[from * order..to * order].to_vec(),
                k: k[from..to].to_vec(),
            },
        };
        Ok(SampleSet {
            rng: self.rng.clone(),
            seed: self.seed,
            start: self.start + from as u64,
            proposal: self.proposal.clone(),
            family: self.family.clone(),
            variates: self.variates[from..to].to_vec(),
            log_q: self.log_q[from..to].to_vec(),
            cache,
        })
    }

    /// Splits into `parts` contiguous blocks whose sizes differ by at most one.
    pub fn split(&self, parts: usize) -> Result<Vec<SampleSet>> {
        if parts == 0 || parts > self.len() {
            return Err(Error::Precondition(format!(
                "cannot split {} variates into {parts} non-empty blocks",
                self.len()
            )));
        }
        let base = self.len() / parts;
        let extra = self.len() % parts;
        let mut out = Vec::with_capacity(parts);
        let mut from = 0;
        for p in 0..parts {
            let size = base + usize::from(p < extra);
            out.push(self.slice(from, from + size)?);
            from += size;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: SampleSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        let m = self.len();
        let ok = m > 0
            && self.log_q.len() == m
            && match &self.cache {
                SampleCache::Mixture { components, log_p } => log_p.len() == m * components,
                SampleCache::Exponential { order, t, k } => t.len() == m * order && k.len() == m,
            };
        if !ok {
            return Err(Error::Precondition("sample set arrays have inconsistent lengths".into()));
        }
        Ok(())
    }
}
