//! Parametric families: mixture families over fixed components, exponential
//! families given by a sufficient statistic and carrier, and closed-form or
//! quadrature oracles used as ground truth.
//!
//! The Beta family `t(x) = (log x, log(1 - x))` is a standard example of a
//! family whose cumulant `log B(a, b)` is closed-form while the inverse of its
//! gradient is not. It is not shipped as an oracle: there is nothing
//! closed-form to check its dual coordinates against.

mod components;
mod oracles;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use components::{Component, Density, Uniform};
pub use oracles::{
    binomial_ef_oracle, gaussian_ef_oracle, pef_quadrature_oracle, BinomialOracle, GaussianOracle,
    PefQuadratureOracle, QuadratureMixtureGenerator,
};

use crate::error::{Error, Result};
use crate::generators::lse::log_sum_exp;

/// Distance to the simplex boundary below which mixture weights are rejected.
pub const SIMPLEX_MARGIN: f64 = 1e-12;

fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

/// `m(x; eta) = sum_i eta_i p_i(x) + (1 - sum_i eta_i) p_0(x)`.
#[derive(Clone)]
pub struct MixtureFamily {
    components: Vec<Arc<dyn Density>>,
}

impl fmt::Debug for MixtureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixtureFamily")
            .field("components", &self.labels())
            .finish()
    }
}

impl MixtureFamily {
    /// A family of order `components.len() - 1`; index 0 is the reference.
    ///
    /// No independence check happens here, see [`MixtureFamily::check_independence`].
    pub fn new(components: Vec<Arc<dyn Density>>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Precondition(
                "a mixture family needs at least two components".into(),
            ));
        }
        Ok(Self { components })
    }

    /// Convenience constructor over built-in components.
    pub fn from_components(components: &[Component]) -> Result<Self> {
        let comps = components
            .iter()
            .map(|c| c.validated().map(|c| Arc::new(c) as Arc<dyn Density>))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    /// Order `D`, the number of free weights.
    pub fn order(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[Arc<dyn Density>] {
        &self.components
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(|c| c.label()).collect()
    }

    /// Stable identifier of the family derived from its component labels.
    pub fn fingerprint(&self) -> String {
        short_hash(&format!("mixture:{}", self.labels().join("|")))
    }

    /// `log p_j(x)` for every component.
    pub fn component_log_densities(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.log_density(x)).collect()
    }

    /// `log m(x; eta)` by a max-shifted log-sum-exp of weighted log-densities.
    pub fn log_density(&self, param: &MixtureParam, x: f64) -> Result<f64> {
        if param.dim() != self.order() {
            return Err(Error::Domain(format!(
                "mixture parameter has dimension {}, family order is {}",
                param.dim(),
                self.order()
            )));
        }
        let terms: Vec<f64> = param
            .full_weights()
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w.ln() + c.log_density(x))
            .collect();
        Ok(log_sum_exp(&terms))
    }

    /// Statistical check of affine independence of the components.
    ///
    /// Builds the matrix of differences `p_j(x) - p_0(x)` (rows scaled by the
    /// largest component density at `x`) over the probe points and rejects the
    /// family if its columns are numerically dependent, or if two components
    /// carry the same label.
    pub fn check_independence(&self, probe: &[f64]) -> Result<()> {
        let labels = self.labels();
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::Degenerate(format!("duplicate component {a}")));
            }
        }
        let d = self.order();
        let mut rows = Vec::with_capacity(probe.len() * d);
        let mut count = 0;
        for &x in probe {
            let lp = self.component_log_densities(x);
            let top = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                continue;
            }
            let p0 = (lp[0] - top).exp();
            rows.extend(lp[1..].iter().map(|l| (l - top).exp() - p0));
            count += 1;
        }
        full_column_rank(count, d, &rows, "mixture components")
    }
}

fn full_column_rank(rows: usize, cols: usize, data: &[f64], what: &str) -> Result<()> {
    if rows < cols {
        return Err(Error::Degenerate(format!(
            "{what}: {rows} usable probe points for {cols} columns"
        )));
    }
    let mut m = DMatrix::from_row_slice(rows, cols, data);
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n == 0.0 {
            return Err(Error::Degenerate(format!("{what}: a column vanishes on every probe point")));
        }
        col /= n;
    }
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 1e-10 * max {
        return Err(Error::Degenerate(format!(
            "{what}: numerically dependent (singular value ratio {:e})",
            min / max
        )));
    }
    Ok(())
}

/// Mixture weights `eta` in the open probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParam(DVector<f64>);

impl MixtureParam {
    pub fn new(eta: DVector<f64>) -> Result<Self> {
        if !in_open_simplex(&eta, 0.0) {
            return Err(Error::Domain(format!(
                "mixture weights {:?} are outside the open simplex",
                eta.as_slice()
            )));
        }
        Ok(Self(eta))
    }

    pub fn from_slice(eta: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(eta))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    /// `(1 - sum eta, eta_1, ..., eta_D)`.
    pub fn full_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.0.len() + 1);
        w.push(1.0 - self.0.sum());
        w.extend(self.0.iter().copied());
        w
    }
}

/// True when every weight exceeds `margin` and the reference weight does too.
pub fn in_open_simplex(eta: &DVector<f64>, margin: f64) -> bool {
    !eta.is_empty()
        && eta.iter().all(|v| v.is_finite() && *v > margin)
        && 1.0 - eta.sum() > margin
}

/// Free function form of [`MixtureFamily::log_density`].
pub fn mixture_log_density(family: &MixtureFamily, param: &MixtureParam, x: f64) -> Result<f64> {
    family.log_density(param, x)
}

/// Statistic callback writing `D` values into the output slice.
pub type StatFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;
/// Log carrier measure `k(x)`.
pub type CarrierFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Sufficient statistic of an exponential family.
#[derive(Clone)]
pub enum SufficientStatistic {
    /// `t(x) = (x^p_1, ..., x^p_D)`.
    Polynomial(Vec<u32>),
    /// Arbitrary statistic writing `D` values into the output slice.
    Custom(StatFn),
}

/// `p(x; theta) ∝ exp(<t(x), theta> + k(x))`.
#[derive(Clone)]
pub struct ExponentialFamily {
    stat: SufficientStatistic,
    carrier: Option<CarrierFn>,
    order: usize,
    label: String,
}

impl fmt::Debug for ExponentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExponentialFamily")
            .field("label", &self.label)
            .field("order", &self.order)
            .finish()
    }
}

impl ExponentialFamily {
    /// Polynomial family with zero carrier. Powers must be distinct and positive.
    pub fn polynomial(powers: &[u32]) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::Precondition("at least one power is required".into()));
        }
        let mut sorted = powers.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != powers.len() || sorted[0] == 0 {
            return Err(Error::Precondition(format!(
                "powers {powers:?} must be distinct and positive"
            )));
        }
        let label = format!(
            "polynomial({})",
            powers.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
        );
        Ok(Self {
            stat: SufficientStatistic::Polynomial(powers.to_vec()),
            carrier: None,
            order: powers.len(),
            label,
        })
    }

    /// Univariate normal family, `t(x) = (x, x^2)`.
    pub fn gaussian() -> Self {
        Self::polynomial(&[1, 2]).expect("valid powers")
    }

    /// A family with a user-supplied statistic and optional carrier.
    pub fn custom(
        order: usize,
        label: impl Into<String>,
        stat: StatFn,
        carrier: Option<CarrierFn>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::Precondition("order must be at least 1".into()));
        }
        Ok(Self {
            stat: SufficientStatistic::Custom(stat),
            carrier,
            order,
            label: label.into(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn powers(&self) -> Option<&[u32]> {
        match &self.stat {
            SufficientStatistic::Polynomial(p) => Some(p),
            SufficientStatistic::Custom(_) => None,
        }
    }

    pub fn fingerprint(&self) -> String {
        short_hash(&format!("exponential:{}", self.label))
    }

    /// Writes `t(x)` into `out` (length `D`).
    pub fn stat_into(&self, x: f64, out: &mut [f64]) {
        match &self.stat {
            SufficientStatistic::Polynomial(powers) => {
                for (o, &p) in out.iter_mut().zip(powers) {
                    *o = x.powi(p as i32);
                }
            }
            SufficientStatistic::Custom(f) => f(x, out),
        }
    }

    pub fn stat(&self, x: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.order);
        self.stat_into(x, out.as_mut_slice());
        out
    }

    /// Carrier term `k(x)`.
    pub fn carrier(&self, x: f64) -> f64 {
        self.carrier.as_ref().map_or(0.0, |k| k(x))
    }

    /// Statistical check that `1, t_1, ..., t_D` are linearly independent on
    /// the probe points.
    pub fn check_independence(&self, probe: &[f64]) -> Result<()> {
        let d = self.order + 1;
        let mut rows = Vec::with_capacity(probe.len() * d);
        let mut t = vec![0.0; self.order];
        for &x in probe {
            self.stat_into(x, &mut t);
            rows.push(1.0);
            rows.extend_from_slice(&t);
        }
        full_column_rank(probe.len(), d, &rows, "sufficient statistics")
    }
}

/// Natural parameter of an exponential family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalParam(pub DVector<f64>);

impl NaturalParam {
    pub fn new(theta: DVector<f64>) -> Result<Self> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("natural parameter must be finite".into()));
        }
        Ok(Self(theta))
    }
}
