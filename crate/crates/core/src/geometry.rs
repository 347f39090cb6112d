//! The dually flat space induced by a Bregman generator.
//!
//! Primal coordinates are points of the generator domain; dual coordinates are
//! gradients. Converting dual to primal inverts the gradient numerically.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Density;
use crate::generators::{ensure_domain, Generator};
use crate::reduce::tree_reduce;
use crate::sampling::variate_rng;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_CLAMP_MARGIN: f64 = 1e-9;

/// Result of a gradient inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub point: DVector<f64>,
    /// `‖∇F(point) − target‖_∞`.
    pub residual: f64,
    pub iterations: usize,
    /// Set when the solution was pulled back from the domain boundary.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicKind {
    Primal,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPoint {
    pub lambda: f64,
    pub primal: DVector<f64>,
    pub dual: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JeffreysMode {
    Exact,
    Skew(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlVariant {
    Naive,
    Extended,
}

#[derive(Debug, Clone)]
pub struct DuallyFlatSpace<G> {
    generator: G,
    pub tol: f64,
    pub max_iter: usize,
    pub clamp_margin: f64,
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl<G: Generator> DuallyFlatSpace<G> {
    pub fn new(generator: G) -> Self {
        Self {
            generator,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            clamp_margin: DEFAULT_CLAMP_MARGIN,
        }
    }

    pub fn generator(&self) -> &G {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// `B_F(θ1 : θ2) = F(θ1) − F(θ2) − ⟨θ1 − θ2, ∇F(θ2)⟩`.
    pub fn bregman_divergence(&self, t1: &DVector<f64>, t2: &DVector<f64>) -> Result<f64> {
        let f1 = self.generator.value(t1)?;
        let f2 = self.generator.value(t2)?;
        let g2 = self.generator.gradient(t2)?;
        Ok(f1 - f2 - (t1 - t2).dot(&g2))
    }

    pub fn dual_coordinates(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        self.generator.gradient(theta)
    }

    pub fn primal_coordinates(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.invert_gradient(eta, None)?.point)
    }

    /// Solves `∇F(θ) = eta`, starting from `start` or the generator's interior point.
    pub fn invert_gradient(
        &self,
        eta: &DVector<f64>,
        start: Option<&DVector<f64>>,
    ) -> Result<Inversion> {
        let g = &self.generator;
        if eta.len() != g.dim() || eta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "cannot invert the gradient at {:?}",
                eta.as_slice()
            )));
        }
        let tol = self.tol * (1.0 + max_abs(eta));
        let x0 = match start {
            Some(s) if g.contains(s) => s.clone(),
            _ => g.interior_point(),
        };
        let newton = self.newton(eta, x0, tol);
        let inv = match newton {
            Ok(inv) => inv,
            Err(err) if g.dim() == 1 => self.bisect(eta, tol).map_err(|_| err)?,
            Err(err) => return Err(err),
        };
        Ok(self.clamp(inv, eta))
    }

    fn residual(&self, x: &DVector<f64>, eta: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let r = self.generator.gradient(x)? - eta;
        let n = max_abs(&r);
        Ok((r, if n.is_nan() { f64::INFINITY } else { n }))
    }

    fn newton(&self, eta: &DVector<f64>, mut x: DVector<f64>, tol: f64) -> Result<Inversion> {
        let g = &self.generator;
        let (mut r, mut res) = self.residual(&x, eta)?;
        let mut iterations = 0;
        let mut converged = res <= tol;
        let mut polish = 0;
        while iterations < self.max_iter && polish < 2 {
            if converged {
                polish += 1;
            }
            let h = g.hessian(&x)?;
            let Some(step) = solve(h, &r) else {
                break;
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &x - &step * t;
                if g.contains(&cand) {
                    if let Ok((rc, nc)) = self.residual(&cand, eta) {
                        if nc < res {
                            x = cand;
                            r = rc;
                            res = nc;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            iterations += 1;
            if !accepted {
                break;
            }
            converged |= res <= tol;
        }
        if converged {
            Ok(Inversion {
                point: x,
                residual: res,
                iterations,
                clamped: false,
            })
        } else {
            Err(Error::NoSolution {
                residual: res,
                reason: format!("Newton stalled after {iterations} iterations"),
            })
        }
    }

    /// One-dimensional fallback: grow a bracket geometrically, then bisect.
    fn bisect(&self, eta: &DVector<f64>, tol: f64) -> Result<Inversion> {
        let g = &self.generator;
        let target = eta[0];
        let grad = |x: f64| -> Result<f64> { Ok(g.gradient(&DVector::from_element(1, x))?[0]) };
        let x0 = g.interior_point()[0];
        let g0 = grad(x0)?;
        let (mut lo, mut hi) = (x0, x0);
        if g0 != target {
            let dir = if g0 < target { 1.0 } else { -1.0 };
            let mut cur = x0;
            let mut step: f64 = 1.0;
            let mut found = false;
            for _ in 0..self.max_iter * 4 {
                let cand = cur + dir * step;
                if g.contains(&DVector::from_element(1, cand)) {
                    let gc = grad(cand)?;
                    if (gc - target) * dir >= 0.0 {
                        (lo, hi) = if dir > 0.0 { (cur, cand) } else { (cand, cur) };
                        found = true;
                        break;
                    }
                    cur = cand;
                    step *= 2.0;
                } else {
                    step *= 0.5;
                    if step < f64::MIN_POSITIVE {
                        break;
                    }
                }
            }
            if !found {
                let res = (grad(cur)? - target).abs();
                return Err(Error::NoSolution {
                    residual: res,
                    reason: "target lies outside the gradient image".into(),
                });
            }
        }
        let mut iterations = 0;
        let (mut x, mut res) = (lo, (grad(lo)? - target).abs());
        while iterations < self.max_iter * 4 {
            let mid = 0.5 * (lo + hi);
            let gm = grad(mid)?;
            let rm = (gm - target).abs();
            if rm < res {
                (x, res) = (mid, rm);
            }
            if rm <= tol * 1e-3 || mid <= lo || mid >= hi {
                break;
            }
            if gm < target {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        let rh = (grad(hi)? - target).abs();
        if rh < res {
            (x, res) = (hi, rh);
        }
        if res > tol {
            return Err(Error::NoSolution {
                residual: res,
                reason: "bisection did not reach the tolerance".into(),
            });
        }
        Ok(Inversion {
            point: DVector::from_element(1, x),
            residual: res,
            iterations,
            clamped: false,
        })
    }

    fn clamp(&self, mut inv: Inversion, eta: &DVector<f64>) -> Inversion {
        if let Some(c) = self.generator.clamp_interior(&inv.point, self.clamp_margin) {
            if let Ok((_, res)) = self.residual(&c, eta) {
                inv.residual = res;
            }
            inv.point = c;
            inv.clamped = true;
        }
        inv
    }

    /// Point at parameter `lambda` on the primal or dual geodesic from `p` to `q`.
    pub fn geodesic(
        &self,
        p: &DVector<f64>,
        q: &DVector<f64>,
        lambda: f64,
        kind: GeodesicKind,
    ) -> Result<GeodesicPoint> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Precondition(format!("lambda {lambda} is not in [0, 1]")));
        }
        let g = &self.generator;
        let endpoint = |x: &DVector<f64>| -> Result<GeodesicPoint> {
            Ok(GeodesicPoint {
                lambda,
                primal: x.clone(),
                dual: g.gradient(x)?,
            })
        };
        let (ep, eq) = (endpoint(p)?, endpoint(q)?);
        if lambda == 0.0 {
            return Ok(ep);
        }
        if lambda == 1.0 {
            return Ok(eq);
        }
        match kind {
            GeodesicKind::Primal => {
                let primal = p * (1.0 - lambda) + q * lambda;
                let dual = g.gradient(&primal)?;
                Ok(GeodesicPoint { lambda, primal, dual })
            }
            GeodesicKind::Dual => {
                let dual = &ep.dual * (1.0 - lambda) + &eq.dual * lambda;
                let primal = self.invert_gradient(&dual, Some(&(p * (1.0 - lambda) + q * lambda)))?.point;
                Ok(GeodesicPoint { lambda, primal, dual })
            }
        }
    }

    /// `J^α(p : q) = (1−α)F(p) + αF(q) − F((1−α)p + αq)`.
    pub fn skew_jensen(&self, p: &DVector<f64>, q: &DVector<f64>, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Precondition(format!("alpha {alpha} is not in (0, 1)")));
        }
        let g = &self.generator;
        if p == q {
            ensure_domain(g, p)?;
            return Ok(0.0);
        }
        let mid = p * (1.0 - alpha) + q * alpha;
        let fm = g.value(&mid)?;
        Ok((1.0 - alpha) * (g.value(p)? - fm) + alpha * (g.value(q)? - fm))
    }

    /// Symmetrized divergence `B(p:q) + B(q:p)`.
    ///
    /// `Exact` also checks the identity `B(p:q) + B(q:p) = ⟨p − q, ∇F(p) − ∇F(q)⟩`.
    /// `Skew(α)` uses `(J^α(p:q) + J^{1−α}(p:q)) / α`, which needs no gradient.
    pub fn jeffreys_divergence(
        &self,
        p: &DVector<f64>,
        q: &DVector<f64>,
        mode: JeffreysMode,
    ) -> Result<f64> {
        match mode {
            JeffreysMode::Exact => {
                let g = &self.generator;
                let (fp, fq) = (g.value(p)?, g.value(q)?);
                let (gp, gq) = (g.gradient(p)?, g.gradient(q)?);
                let d = p - q;
                let (a, b) = (d.dot(&gq), d.dot(&gp));
                let sum = (fp - fq - a) + (fq - fp + b);
                let inner = b - a;
                let scale = fp.abs() + fq.abs() + a.abs() + b.abs();
                let slack = 1e-10 * inner.abs().max(sum.abs()) + 16.0 * f64::EPSILON * scale;
                if (sum - inner).abs() > slack {
                    return Err(Error::Mismatch(format!(
                        "Jeffreys sum {sum:e} disagrees with inner product {inner:e}"
                    )));
                }
                Ok(sum)
            }
            JeffreysMode::Skew(alpha) => {
                if !(alpha > 0.0 && alpha <= 0.5) {
                    return Err(Error::Precondition(format!("alpha {alpha} is not in (0, 1/2]")));
                }
                Ok((self.skew_jensen(p, q, alpha)? + self.skew_jensen(p, q, 1.0 - alpha)?) / alpha)
            }
        }
    }

    /// Legendre conjugate `F*(η) = ⟨η, θ(η)⟩ − F(θ(η))`.
    pub fn dual_potential(&self, eta: &DVector<f64>) -> Result<f64> {
        let theta = self.primal_coordinates(eta)?;
        Ok(eta.dot(&theta) - self.generator.value(&theta)?)
    }

    /// `B_{F*}(η1 : η2)`, with `∇F*(η2) = θ(η2)` obtained by inversion.
    pub fn dual_bregman_divergence(&self, e1: &DVector<f64>, e2: &DVector<f64>) -> Result<f64> {
        let t1 = self.primal_coordinates(e1)?;
        let t2 = self.primal_coordinates(e2)?;
        let g = &self.generator;
        let f1 = e1.dot(&t1) - g.value(&t1)?;
        let f2 = e2.dot(&t2) - g.value(&t2)?;
        Ok(f1 - f2 - (e1 - e2).dot(&t2))
    }

    /// `‖∇²F(θ) · (∇²F(θ̂))⁻¹ − I‖_max` where `θ̂` is recovered from `η = ∇F(θ)`.
    pub fn crouzeix_check(&self, theta: &DVector<f64>) -> Result<f64> {
        let g = &self.generator;
        let h = g.hessian(theta)?;
        let eta = g.gradient(theta)?;
        let back = self.invert_gradient(&eta, Some(theta))?.point;
        let dual = g
            .hessian(&back)?
            .try_inverse()
            .ok_or_else(|| Error::NotSpd("singular Hessian".into()))?;
        let d = g.dim();
        Ok((h * dual - DMatrix::identity(d, d)).amax())
    }
}

fn solve(h: DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(r));
    }
    h.lu().solve(r)
}

/// Monte Carlo estimate of `KL(p : q)` from `m` variates of `p`.
///
/// The naive estimator averages `log p/q` and can come out negative. The
/// extended one averages `log p/q + q/p − 1`, every term of which is nonnegative.
pub fn mc_kl_estimate(
    p: &dyn Density,
    q: &dyn Density,
    m: usize,
    seed: u64,
    variant: KlVariant,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let terms = tree_reduce(
        m,
        || Ok(0.0),
        |acc: &mut Result<f64>, i| {
            let Ok(sum) = acc else { return };
            let x = p.sample(&mut variate_rng(seed, i as u64));
            let u = q.log_density(x) - p.log_density(x);
            if !u.is_finite() {
                *acc = Err(Error::NonFinite {
                    index: i,
                    x,
                    what: "log-density ratio".into(),
                });
                return;
            }
            *sum += match variant {
                KlVariant::Naive => -u,
                KlVariant::Extended => (u.exp_m1() - u).max(0.0),
            };
        },
        |a, b| Ok(a? + b?),
    )?;
    Ok(terms / m as f64)
}
