//! Univariate component densities.

use std::f64::consts::PI;
use std::fmt;

use rand::distr::Open01;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed probability density on the real line, evaluated in log-space.
///
/// Sampling draws its randomness from the caller's stream, so a density
/// carries no mutable state and can be shared freely across threads.
pub trait Density: Send + Sync + fmt::Debug {
    /// Natural log of the density at `x`.
    fn log_density(&self, x: f64) -> f64;

    /// One draw using the supplied random stream.
    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    /// Identifier, used for family fingerprints and duplicate detection.
    fn label(&self) -> String;

    /// Rough `(location, scale)` of the mass, used to place quadrature grids.
    fn location_scale(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Built-in component densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Gaussian { mean: f64, std: f64 },
    Laplace { loc: f64, scale: f64 },
    Cauchy { loc: f64, scale: f64 },
}

impl Component {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::Gaussian { mean, std }.validated()
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        Self::Laplace { loc, scale }.validated()
    }

    pub fn cauchy(loc: f64, scale: f64) -> Result<Self> {
        Self::Cauchy { loc, scale }.validated()
    }

    /// Checks the parameters; deserialized components should go through this.
    pub fn validated(self) -> Result<Self> {
        let (loc, scale) = self.location_scale();
        if !loc.is_finite() || !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "{}: location must be finite and scale positive",
                self.label()
            )));
        }
        Ok(self)
    }
}

fn open01(rng: &mut dyn RngCore) -> f64 {
    rng.sample(Open01)
}

impl Density for Component {
    fn log_density(&self, x: f64) -> f64 {
        match *self {
            Component::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                -0.5 * z * z - std.ln() - 0.5 * (2.0 * PI).ln()
            }
            Component::Laplace { loc, scale } => -(x - loc).abs() / scale - (2.0 * scale).ln(),
            Component::Cauchy { loc, scale } => {
                let z = (x - loc) / scale;
                -(PI * scale).ln() - z.mul_add(z, 1.0).ln()
            }
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            Component::Gaussian { mean, std } => {
                // Box–Muller, cosine branch.
                let u1 = open01(rng);
                let u2 = open01(rng);
                mean + std * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            }
            Component::Laplace { loc, scale } => {
                let u = open01(rng) - 0.5;
                loc - scale * u.signum() * (-2.0 * u.abs()).ln_1p()
            }
            Component::Cauchy { loc, scale } => loc + scale * (PI * (open01(rng) - 0.5)).tan(),
        }
    }

    fn label(&self) -> String {
        match *self {
            Component::Gaussian { mean, std } => format!("gaussian({mean},{std})"),
            Component::Laplace { loc, scale } => format!("laplace({loc},{scale})"),
            Component::Cauchy { loc, scale } => format!("cauchy({loc},{scale})"),
        }
    }

    fn location_scale(&self) -> (f64, f64) {
        match *self {
            Component::Gaussian { mean, std } => (mean, std),
            Component::Laplace { loc, scale } | Component::Cauchy { loc, scale } => (loc, scale),
        }
    }
}

/// Uniform density on `[lo, hi]`; only meant as an importance proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("uniform({lo},{hi}): need lo < hi")));
        }
        Ok(Self { lo, hi })
    }
}

impl Density for Uniform {
    fn log_density(&self, x: f64) -> f64 {
        if (self.lo..=self.hi).contains(&x) {
            -(self.hi - self.lo).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.lo + (self.hi - self.lo) * open01(rng)
    }

    fn label(&self) -> String {
        format!("uniform({},{})", self.lo, self.hi)
    }

    fn location_scale(&self) -> (f64, f64) {
        (0.5 * (self.lo + self.hi), 0.5 * (self.hi - self.lo))
    }
}
