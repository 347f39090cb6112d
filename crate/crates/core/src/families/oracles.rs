//! Ground-truth generators: closed-form cumulants and quadrature integrals.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{in_open_simplex, MixtureFamily, SIMPLEX_MARGIN};
use crate::error::{Error, Result};
use crate::generators::{clamp_to_simplex, ensure_domain, Generator};
use crate::quadrature::{integrate_real_line, ORACLE_ABS_TOL};

/// Cumulant of the univariate normal family with `t(x) = (x, x^2)`:
/// `F(theta) = -theta_1^2 / (4 theta_2) + 1/2 log(pi / -theta_2)`, `theta_2 < 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianOracle;

pub fn gaussian_ef_oracle() -> GaussianOracle {
    GaussianOracle
}

impl GaussianOracle {
    /// Natural parameter of `N(mean, std^2)`.
    pub fn natural_from_moments(mean: f64, std: f64) -> DVector<f64> {
        let var = std * std;
        DVector::from_vec(vec![mean / var, -0.5 / var])
    }

    /// `(mean, std)` of the normal with natural parameter `theta`.
    pub fn moments_from_natural(theta: &DVector<f64>) -> (f64, f64) {
        let var = -0.5 / theta[1];
        (theta[0] * var, var.sqrt())
    }
}

impl Generator for GaussianOracle {
    fn dim(&self) -> usize {
        2
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == 2 && x[0].is_finite() && x[1].is_finite() && x[1] < 0.0
    }

    fn value(&self, th: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, th)?;
        Ok(-th[0] * th[0] / (4.0 * th[1]) + 0.5 * (PI / -th[1]).ln())
    }

    fn gradient(&self, th: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, th)?;
        let (a, b) = (th[0], th[1]);
        Ok(DVector::from_vec(vec![
            -a / (2.0 * b),
            a * a / (4.0 * b * b) - 1.0 / (2.0 * b),
        ]))
    }

    fn hessian(&self, th: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, th)?;
        let (a, b) = (th[0], th[1]);
        let h11 = -1.0 / (2.0 * b);
        let h12 = a / (2.0 * b * b);
        let h22 = -a * a / (2.0 * b * b * b) + 1.0 / (2.0 * b * b);
        Ok(DMatrix::from_row_slice(2, 2, &[h11, h12, h12, h22]))
    }

    fn interior_point(&self) -> DVector<f64> {
        DVector::from_vec(vec![0.0, -0.5])
    }

    fn name(&self) -> String {
        "gaussian-oracle".into()
    }
}

/// Cumulant of the Bernoulli/binomial family, `F(theta) = log(1 + e^theta)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BinomialOracle;

pub fn binomial_ef_oracle() -> BinomialOracle {
    BinomialOracle
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Generator for BinomialOracle {
    fn dim(&self) -> usize {
        1
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == 1 && x[0].is_finite()
    }

    fn value(&self, th: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, th)?;
        let t = th[0];
        Ok(t.max(0.0) + (-t.abs()).exp().ln_1p())
    }

    fn gradient(&self, th: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, th)?;
        Ok(DVector::from_element(1, sigmoid(th[0])))
    }

    fn hessian(&self, th: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, th)?;
        let s = sigmoid(th[0]);
        Ok(DMatrix::from_element(1, 1, s * sigmoid(-th[0])))
    }

    fn interior_point(&self) -> DVector<f64> {
        DVector::zeros(1)
    }

    fn name(&self) -> String {
        "binomial-oracle".into()
    }
}

/// Cumulant of a polynomial exponential family, `log ∫ exp(sum_j theta_j x^p_j) dx`,
/// evaluated by adaptive quadrature.
#[derive(Debug, Clone)]
pub struct PefQuadratureOracle {
    powers: Vec<u32>,
    lead: usize,
}

pub fn pef_quadrature_oracle(powers: &[u32]) -> Result<PefQuadratureOracle> {
    PefQuadratureOracle::new(powers)
}

impl PefQuadratureOracle {
    pub fn new(powers: &[u32]) -> Result<Self> {
        let mut sorted = powers.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if powers.is_empty() || sorted.len() != powers.len() || sorted[0] == 0 {
            return Err(Error::Precondition(format!(
                "powers {powers:?} must be distinct and positive"
            )));
        }
        let lead = (0..powers.len()).max_by_key(|&i| powers[i]).expect("non-empty");
        Ok(Self {
            powers: powers.to_vec(),
            lead,
        })
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    fn exponent(&self, th: &DVector<f64>, x: f64) -> f64 {
        self.powers
            .iter()
            .zip(th.iter())
            .map(|(&p, t)| t * x.powi(p as i32))
            .sum()
    }

    /// Returns `(shift, center, scale)` such that `exp(s(x) - shift)` peaks near 1 at `center`.
    fn layout(&self, th: &DVector<f64>) -> Result<(f64, f64, f64)> {
        let p_lead = self.powers[self.lead] as i32;
        let c_lead = -th[self.lead];
        // Radius past which the leading term dominates all others by a wide margin.
        let mut radius: f64 = 1.0;
        for _ in 0..200 {
            let lead = c_lead * radius.powi(p_lead);
            let rest: f64 = self
                .powers
                .iter()
                .zip(th.iter())
                .enumerate()
                .filter(|(i, _)| *i != self.lead)
                .map(|(_, (&p, t))| t.abs() * radius.powi(p as i32))
                .sum();
            if lead > 2.0 * rest + 50.0 {
                break;
            }
            radius *= 1.5;
        }
        let n = 4000;
        let (mut shift, mut center) = (f64::NEG_INFINITY, 0.0);
        for i in 0..=n {
            let x = radius * (2.0 * i as f64 / n as f64 - 1.0);
            let s = self.exponent(th, x);
            if s > shift {
                shift = s;
                center = x;
            }
        }
        if !shift.is_finite() {
            return Err(Error::Domain("exponent is not finite".into()));
        }
        Ok((shift, center, radius / 8.0))
    }

    fn integral<F: Fn(f64, f64) -> f64>(&self, th: &DVector<f64>, weight: F) -> Result<(f64, f64)> {
        let (shift, center, scale) = self.layout(th)?;
        let v = integrate_real_line(
            |x| weight(x, (self.exponent(th, x) - shift).exp()),
            center,
            scale,
            &[0.0],
            ORACLE_ABS_TOL,
        )
        .map_err(|e| Error::Domain(format!("PEF integral: {e}")))?;
        Ok((v, shift))
    }

    fn moments(&self, th: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let (z, _) = self.integral(th, |_, e| e)?;
        let mut mean = DVector::zeros(self.powers.len());
        for (j, &p) in self.powers.iter().enumerate() {
            let (v, _) = self.integral(th, |x, e| x.powi(p as i32) * e)?;
            mean[j] = v / z;
        }
        Ok((z, mean))
    }
}

impl Generator for PefQuadratureOracle {
    fn dim(&self) -> usize {
        self.powers.len()
    }

    /// The leading power must be even with a negative coefficient.
    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.powers.len()
            && x.iter().all(|v| v.is_finite())
            && self.powers[self.lead].is_multiple_of(2)
            && x[self.lead] < 0.0
    }

    fn value(&self, th: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, th)?;
        let (z, shift) = self.integral(th, |_, e| e)?;
        Ok(shift + z.ln())
    }

    fn gradient(&self, th: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, th)?;
        Ok(self.moments(th)?.1)
    }

    fn hessian(&self, th: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, th)?;
        let (z, mean) = self.moments(th)?;
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let (pi, pj) = (self.powers[i] as i32, self.powers[j] as i32);
                let (mi, mj) = (mean[i], mean[j]);
                let (v, _) =
                    self.integral(th, |x, e| (x.powi(pi) - mi) * (x.powi(pj) - mj) * e)?;
                h[(i, j)] = v / z;
                h[(j, i)] = v / z;
            }
        }
        Ok(h)
    }

    fn interior_point(&self) -> DVector<f64> {
        let mut p = DVector::zeros(self.dim());
        p[self.lead] = -1.0;
        p
    }

    fn name(&self) -> String {
        format!("pef-quadrature{:?}", self.powers)
    }
}

/// The exact negentropy `G(eta) = ∫ m(x; eta) log m(x; eta) dx` of a mixture
/// family, evaluated by adaptive quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureMixtureGenerator {
    family: MixtureFamily,
    center: f64,
    scale: f64,
    breaks: Vec<f64>,
}

impl QuadratureMixtureGenerator {
    pub fn new(family: MixtureFamily) -> Self {
        let ls: Vec<(f64, f64)> = family.components().iter().map(|c| c.location_scale()).collect();
        let center = ls.iter().map(|(l, _)| l).sum::<f64>() / ls.len() as f64;
        let scale = ls.iter().map(|(_, s)| *s).fold(0.0, f64::max);
        let breaks = ls.iter().map(|(l, _)| *l).collect();
        Self {
            family,
            center,
            scale,
            breaks,
        }
    }

    pub fn family(&self) -> &MixtureFamily {
        &self.family
    }

    fn log_weights(&self, eta: &DVector<f64>) -> Vec<f64> {
        let mut lw = vec![(1.0 - eta.sum()).ln()];
        lw.extend(eta.iter().map(|v| v.ln()));
        lw
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        integrate_real_line(f, self.center, self.scale, &self.breaks, ORACLE_ABS_TOL)
    }

    /// Component log-densities and the log-mixture at `x`.
    fn eval(&self, lw: &[f64], x: f64) -> (Vec<f64>, f64) {
        let lp = self.family.component_log_densities(x);
        let terms: Vec<f64> = lp.iter().zip(lw).map(|(a, b)| a + b).collect();
        let lm = crate::generators::lse::log_sum_exp(&terms);
        (lp, lm)
    }

    /// `KL(m(.; eta1) : m(.; eta2))` by quadrature.
    pub fn kl(&self, eta1: &DVector<f64>, eta2: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, eta1)?;
        ensure_domain(self, eta2)?;
        let (l1, l2) = (self.log_weights(eta1), self.log_weights(eta2));
        self.integrate(|x| {
            let (_, a) = self.eval(&l1, x);
            let (_, b) = self.eval(&l2, x);
            if a == f64::NEG_INFINITY {
                0.0
            } else {
                a.exp() * (a - b)
            }
        })
    }
}

impl Generator for QuadratureMixtureGenerator {
    fn dim(&self) -> usize {
        self.family.order()
    }

    fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim() && in_open_simplex(x, SIMPLEX_MARGIN)
    }

    fn value(&self, eta: &DVector<f64>) -> Result<f64> {
        ensure_domain(self, eta)?;
        let lw = self.log_weights(eta);
        self.integrate(|x| {
            let (_, lm) = self.eval(&lw, x);
            if lm == f64::NEG_INFINITY {
                0.0
            } else {
                lm.exp() * lm
            }
        })
    }

    fn gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_domain(self, eta)?;
        let lw = self.log_weights(eta);
        let d = self.dim();
        let mut g = DVector::zeros(d);
        for i in 0..d {
            g[i] = self.integrate(|x| {
                let (lp, lm) = self.eval(&lw, x);
                let diff = lp[i + 1].exp() - lp[0].exp();
                if diff == 0.0 {
                    0.0
                } else {
                    diff * (1.0 + lm)
                }
            })?;
        }
        Ok(g)
    }

    fn hessian(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_domain(self, eta)?;
        let lw = self.log_weights(eta);
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = self.integrate(|x| {
                    let (lp, lm) = self.eval(&lw, x);
                    let half = 0.5 * lm;
                    let di = (lp[i + 1] - half).exp() - (lp[0] - half).exp();
                    let dj = (lp[j + 1] - half).exp() - (lp[0] - half).exp();
                    di * dj
                })?;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    fn interior_point(&self) -> DVector<f64> {
        let d = self.dim();
        DVector::from_element(d, 1.0 / (d + 1) as f64)
    }

    fn name(&self) -> String {
        "quadrature-negentropy".into()
    }

    fn clamp_interior(&self, x: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
        clamp_to_simplex(x, margin)
    }
}
