//! Bregman generators.
//!
//! [`Generator`] is the value/gradient/Hessian interface shared by the Monte
//! Carlo surrogates ([`MCMixtureGenerator`], [`MCExponentialGenerator`]) and
//! the closed-form or quadrature oracles in [`crate::families`].

mod aggregate;
mod exponential;
pub mod lse;
mod mixture;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use aggregate::{aggregate_exponential_generators, aggregate_mixture_generators, ExponentialAggregate};
pub use exponential::{build_mc_exponential_generator, reference_index, AffineTerm, MCExponentialGenerator};
pub use mixture::{build_mc_mixture_generator, MCMixtureGenerator};

use crate::error::{Error, Result};

/// Symmetry tolerance for Hessians, relative to their largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A strictly convex, twice differentiable function on an open convex domain.
pub trait Generator: Send + Sync {
    /// Dimension `D` of the parameter space.
    fn dim(&self) -> usize;

    /// Whether `x` lies in the declared (open) domain.
    fn contains(&self, x: &DVector<f64>) -> bool;

    fn value(&self, x: &DVector<f64>) -> Result<f64>;

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// A point well inside the domain, used to start gradient inversions.
    fn interior_point(&self) -> DVector<f64>;

    fn name(&self) -> String;

    /// Moves a point lying within `margin` of the domain boundary back to
    /// distance `margin`. Returns `None` when `x` needs no change or the
    /// domain has no boundary.
    fn clamp_interior(&self, _x: &DVector<f64>, _margin: f64) -> Option<DVector<f64>> {
        None
    }
}

macro_rules! forward_generator {
    ($($ptr:ty),*) => {$(
        impl<G: Generator + ?Sized> Generator for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn contains(&self, x: &DVector<f64>) -> bool { (**self).contains(x) }
            fn value(&self, x: &DVector<f64>) -> Result<f64> { (**self).value(x) }
            fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> { (**self).gradient(x) }
            fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> { (**self).hessian(x) }
            fn interior_point(&self) -> DVector<f64> { (**self).interior_point() }
            fn name(&self) -> String { (**self).name() }
            fn clamp_interior(&self, x: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
                (**self).clamp_interior(x, margin)
            }
        }
    )*};
}

forward_generator!(&G, Box<G>, Arc<G>);

/// Fails with a domain error unless `x` has the right size and lies in the domain.
pub fn ensure_domain<G: Generator + ?Sized>(g: &G, x: &DVector<f64>) -> Result<()> {
    if x.len() != g.dim() {
        return Err(Error::Domain(format!(
            "{}: parameter of dimension {} for a generator of dimension {}",
            g.name(),
            x.len(),
            g.dim()
        )));
    }
    if !g.contains(x) {
        return Err(Error::Domain(format!(
            "{}: parameter {:?} is outside the domain",
            g.name(),
            x.as_slice()
        )));
    }
    Ok(())
}

/// Checks symmetry and attempts a Cholesky factorization.
pub fn check_spd(h: &DMatrix<f64>) -> Result<()> {
    let scale = h.amax();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::NotSpd(format!("Hessian scale {scale}")));
    }
    let asym = (h - h.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSpd(format!("asymmetry {asym:e} at scale {scale:e}")));
    }
    if h.clone().cholesky().is_none() {
        return Err(Error::NotSpd("Cholesky factorization failed".into()));
    }
    Ok(())
}

/// `F(x) + <slope, x> + offset`; induces the same divergence as `F`.
#[derive(Debug, Clone)]
pub struct AffineShim<G> {
    pub inner: G,
    pub slope: DVector<f64>,
    pub offset: f64,
}

impl<G: Generator> AffineShim<G> {
    pub fn new(inner: G, slope: DVector<f64>, offset: f64) -> Result<Self> {
        if slope.len() != inner.dim() {
            return Err(Error::Precondition("affine slope has the wrong dimension".into()));
        }
        Ok(Self { inner, slope, offset })
    }
}

impl<G: Generator> Generator for AffineShim<G> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn contains(&self, x: &DVector<f64>) -> bool {
        self.inner.contains(x)
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.inner.value(x)? + self.slope.dot(x) + self.offset)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.inner.gradient(x)? + &self.slope)
    }
    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.inner.hessian(x)
    }
    fn interior_point(&self) -> DVector<f64> {
        self.inner.interior_point()
    }
    fn name(&self) -> String {
        format!("affine({})", self.inner.name())
    }
    fn clamp_interior(&self, x: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
        self.inner.clamp_interior(x, margin)
    }
}

/// Positive combination `sum_i w_i F_i` of generators sharing a domain.
pub struct LinearCombination<G> {
    terms: Vec<(f64, G)>,
}

impl<G: Generator> LinearCombination<G> {
    pub fn new(terms: Vec<(f64, G)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::Precondition("empty linear combination".into()));
        };
        let d = first.1.dim();
        if terms.iter().any(|(w, g)| !(w.is_finite() && *w > 0.0) || g.dim() != d) {
            return Err(Error::Precondition(
                "weights must be positive and dimensions equal".into(),
            ));
        }
        Ok(Self { terms })
    }
}

impl<G: Generator> Generator for LinearCombination<G> {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }
    fn contains(&self, x: &DVector<f64>) -> bool {
        self.terms.iter().all(|(_, g)| g.contains(x))
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.terms.iter().map(|(w, g)| Ok(w * g.value(x)?)).sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut acc = DVector::zeros(self.dim());
        for (w, g) in &self.terms {
            acc += g.gradient(x)? * *w;
        }
        Ok(acc)
    }
    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let mut acc = DMatrix::zeros(d, d);
        for (w, g) in &self.terms {
            acc += g.hessian(x)? * *w;
        }
        Ok(acc)
    }
    fn interior_point(&self) -> DVector<f64> {
        self.terms[0].1.interior_point()
    }
    fn name(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, g)| format!("{w}*{}", g.name()))
            .collect();
        parts.join("+")
    }
    fn clamp_interior(&self, x: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
        self.terms[0].1.clamp_interior(x, margin)
    }
}

/// Pulls `eta` to distance at least `margin` from the simplex boundary.
pub(crate) fn clamp_to_simplex(eta: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
    let mut out = eta.map(|v| if v.is_nan() { margin } else { v.max(margin) });
    let total = out.sum();
    if 1.0 - total < margin {
        let excess = total - (1.0 - margin);
        // Remove the excess from coordinates above the margin, proportionally.
        let room: f64 = out.iter().map(|v| v - margin).sum();
        if room > 0.0 {
            out = out.map(|v| v - excess * (v - margin) / room);
        }
    }
    (out != *eta).then_some(out)
}
