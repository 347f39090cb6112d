//! Bregman k-means over a dually flat space.
//!
//! Right-sided clustering assigns `x` to `argmin_c B(x : c)` and moves each
//! center to the arithmetic mean of its members. Left-sided clustering uses
//! `B(c : x)` and the mean in dual coordinates. Mixed clustering keeps a
//! (left, right) center pair per cluster.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::geometry::{DuallyFlatSpace, JeffreysMode};

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_COST_TOL: f64 = 1e-10;
pub const DEFAULT_SKEW_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Variant {
    Right,
    Left,
    Mixed,
    /// Symmetrized skew-Jensen surrogate of the Jeffreys divergence.
    JeffreysSkew { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seeding {
    KmeansPlusPlus,
    Forgy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub variant: Variant,
    pub seeding: Seeding,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Weight of the left term in the mixed divergence.
    pub mixed_weight: f64,
}

impl ClusterConfig {
    pub fn new(k: usize, variant: Variant, seed: u64) -> Self {
        Self {
            k,
            variant,
            seeding: Seeding::KmeansPlusPlus,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_COST_TOL,
            seed,
            mixed_weight: 0.5,
        }
    }

    pub fn with_seeding(mut self, seeding: Seeding) -> Self {
        self.seeding = seeding;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Center {
    Pair { left: DVector<f64>, right: DVector<f64> },
    Single(DVector<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centers: Vec<Center>,
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterResult {
    pub fn cost(&self) -> f64 {
        self.cost_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per point: index, coordinates, cluster label.
    pub fn to_csv(&self, points: &[DVector<f64>]) -> String {
        let d = points.first().map_or(0, |p| p.len());
        let mut out = String::from("index");
        for j in 0..d {
            let _ = write!(out, ",x{j}");
        }
        out.push_str(",cluster\n");
        for (i, (p, a)) in points.iter().zip(&self.assignments).enumerate() {
            let _ = write!(out, "{i}");
            for v in p.iter() {
                let _ = write!(out, ",{v:.16e}");
            }
            let _ = writeln!(out, ",{a}");
        }
        out
    }
}

/// Cached `F` and `∇F` at a point.
#[derive(Clone)]
struct Eval {
    x: DVector<f64>,
    f: f64,
    g: DVector<f64>,
}

impl Eval {
    fn new<G: Generator>(gen: &G, x: &DVector<f64>) -> Result<Self> {
        Ok(Self {
            x: x.clone(),
            f: gen.value(x)?,
            g: gen.gradient(x)?,
        })
    }

    /// `B(self : other)`.
    fn div(&self, other: &Eval) -> f64 {
        if self.x == other.x {
            return 0.0;
        }
        self.f - other.f - (&self.x - &other.x).dot(&other.g)
    }
}

#[derive(Clone)]
struct State {
    left: Vec<Eval>,
    right: Vec<Eval>,
}

struct Runner<'a, G> {
    space: &'a DuallyFlatSpace<G>,
    points: Vec<Eval>,
    variant: Variant,
    weight: f64,
}

impl<G: Generator> Runner<'_, G> {
    fn div(&self, i: usize, s: &State, c: usize) -> Result<f64> {
        let x = &self.points[i];
        Ok(match self.variant {
            Variant::Right => x.div(&s.right[c]),
            Variant::Left => s.left[c].div(x),
            Variant::Mixed => self.weight * s.left[c].div(x) + (1.0 - self.weight) * x.div(&s.right[c]),
            Variant::JeffreysSkew { alpha } => {
                self.space
                    .jeffreys_divergence(&x.x, &s.right[c].x, JeffreysMode::Skew(alpha))?
            }
        })
    }

    fn seed_state(&self, idx: &[usize]) -> State {
        let evals: Vec<Eval> = idx.iter().map(|&i| self.points[i].clone()).collect();
        State {
            left: evals.clone(),
            right: evals,
        }
    }

    fn assign(&self, s: &State, k: usize) -> Result<Vec<(usize, f64)>> {
        (0..self.points.len())
            .into_par_iter()
            .map(|i| {
                let mut best = (0, self.div(i, s, 0)?);
                for c in 1..k {
                    let d = self.div(i, s, c)?;
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                Ok(best)
            })
            .collect()
    }

    fn cost(&self, s: &State, assignments: &[usize]) -> Result<f64> {
        let d = (0..self.points.len())
            .into_par_iter()
            .map(|i| self.div(i, s, assignments[i]))
            .collect::<Result<Vec<_>>>()?;
        Ok(d.iter().sum())
    }

    fn seeding(&self, cfg: &ClusterConfig) -> Result<State> {
        let n = self.points.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut chosen = vec![rng.random_range(0..n)];
        match cfg.seeding {
            Seeding::Forgy => {
                while chosen.len() < cfg.k {
                    let c = rng.random_range(0..n);
                    if !chosen.contains(&c) {
                        chosen.push(c);
                    }
                }
            }
            Seeding::KmeansPlusPlus => {
                while chosen.len() < cfg.k {
                    let s = self.seed_state(&chosen);
                    let dist: Vec<f64> = self
                        .assign(&s, chosen.len())?
                        .into_iter()
                        .enumerate()
                        .map(|(i, (_, d))| if chosen.contains(&i) { 0.0 } else { d.max(0.0) })
                        .collect();
                    let total: f64 = dist.iter().sum();
                    let pick = if total > 0.0 && total.is_finite() {
                        let target = rng.random::<f64>() * total;
                        let mut acc = 0.0;
                        let mut pick = None;
                        for (i, d) in dist.iter().enumerate() {
                            acc += d;
                            if *d > 0.0 && acc > target {
                                pick = Some(i);
                                break;
                            }
                        }
                        pick.unwrap_or_else(|| dist.iter().rposition(|d| *d > 0.0).unwrap_or(0))
                    } else {
                        let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                        free[rng.random_range(0..free.len())]
                    };
                    chosen.push(pick);
                }
            }
        }
        Ok(self.seed_state(&chosen))
    }

    fn update(&self, s: &State, assignments: &[usize], k: usize) -> Result<State> {
        let gen = self.space.generator();
        let d = self.space.dim();
        let mut next = s.clone();
        for c in 0..k {
            let members: Vec<&Eval> = assignments
                .iter()
                .zip(&self.points)
                .filter(|(a, _)| **a == c)
                .map(|(_, p)| p)
                .collect();
            let count = members.len() as f64;
            let needs_right = !matches!(self.variant, Variant::Left);
            let needs_left = matches!(self.variant, Variant::Left | Variant::Mixed);
            if needs_right {
                let mean = members.iter().fold(DVector::zeros(d), |acc, p| acc + &p.x) / count;
                next.right[c] = if members.len() == 1 {
                    members[0].clone()
                } else {
                    Eval::new(gen, &mean)?
                };
            }
            if needs_left {
                next.left[c] = if members.len() == 1 {
                    members[0].clone()
                } else {
                    let mean = members.iter().fold(DVector::zeros(d), |acc, p| acc + &p.g) / count;
                    let start = &s.left[c].x;
                    let inv = self.space.invert_gradient(&mean, Some(start)).map_err(|e| {
                        Error::Clustering(format!(
                            "left center of cluster {c} at mean gradient {:?}: {e}",
                            mean.as_slice()
                        ))
                    })?;
                    Eval::new(gen, &inv.point)?
                };
            }
        }
        Ok(next)
    }

    /// Gives each empty cluster the point farthest from its own center.
    fn repair(&self, s: &mut State, best: &mut [(usize, f64)], k: usize) {
        for c in 0..k {
            if best.iter().any(|(a, _)| *a == c) {
                continue;
            }
            let mut counts = vec![0usize; k];
            for (a, _) in best.iter() {
                counts[*a] += 1;
            }
            let far = (0..best.len())
                .filter(|&i| counts[best[i].0] > 1)
                .fold(None::<usize>, |acc, i| match acc {
                    Some(j) if best[j].1 >= best[i].1 => Some(j),
                    _ => Some(i),
                });
            if let Some(i) = far {
                best[i] = (c, 0.0);
                s.left[c] = self.points[i].clone();
                s.right[c] = self.points[i].clone();
            }
        }
    }

    fn centers(&self, s: &State, k: usize) -> Vec<Center> {
        (0..k)
            .map(|c| match self.variant {
                Variant::Right | Variant::JeffreysSkew { .. } => Center::Single(s.right[c].x.clone()),
                Variant::Left => Center::Single(s.left[c].x.clone()),
                Variant::Mixed => Center::Pair {
                    left: s.left[c].x.clone(),
                    right: s.right[c].x.clone(),
                },
            })
            .collect()
    }
}

/// Runs the variant named in `cfg`.
pub fn cluster<G: Generator>(
    space: &DuallyFlatSpace<G>,
    points: &[DVector<f64>],
    cfg: &ClusterConfig,
) -> Result<ClusterResult> {
    let k = cfg.k;
    let n = points.len();
    if n == 0 {
        return Err(Error::Precondition("no points to cluster".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("k = {k} must lie in 1..={n}")));
    }
    if !(cfg.mixed_weight > 0.0 && cfg.mixed_weight < 1.0) {
        return Err(Error::Precondition("mixed weight must lie in (0, 1)".into()));
    }
    if let Variant::JeffreysSkew { alpha } = cfg.variant {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::Precondition(format!("alpha {alpha} is not in (0, 1/2]")));
        }
    }
    let gen = space.generator();
    let runner = Runner {
        space,
        points: points
            .iter()
            .map(|p| Eval::new(gen, p))
            .collect::<Result<Vec<_>>>()?,
        variant: cfg.variant,
        weight: cfg.mixed_weight,
    };

    let mut state = runner.seeding(cfg)?;
    let mut best = runner.assign(&state, k)?;
    runner.repair(&mut state, &mut best, k);
    let mut assignments: Vec<usize> = best.iter().map(|b| b.0).collect();
    let mut cost_history = vec![runner.cost(&state, &assignments)?];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        let next = runner.update(&state, &assignments, k)?;
        let cost = runner.cost(&next, &assignments)?;
        let prev = *cost_history.last().expect("non-empty history");
        if cost > prev + 1e-12 * (1.0 + prev.abs()) {
            // The center update did not improve the cost; keep the previous state.
            converged = true;
            break;
        }
        state = next;
        iterations += 1;
        let mut best = runner.assign(&state, k)?;
        runner.repair(&mut state, &mut best, k);
        let fresh: Vec<usize> = best.iter().map(|b| b.0).collect();
        let changed = fresh != assignments;
        if changed {
            assignments = fresh;
        }
        let cost = runner.cost(&state, &assignments)?;
        cost_history.push(cost);
        if !changed {
            converged = true;
            break;
        }
    }

    Ok(ClusterResult {
        assignments,
        centers: runner.centers(&state, k),
        cost_history,
        iterations,
        converged,
    })
}

fn with_variant(cfg: &ClusterConfig, variant: Variant) -> ClusterConfig {
    ClusterConfig {
        variant,
        ..cfg.clone()
    }
}

pub fn right_sided_kmeans<G: Generator>(
    space: &DuallyFlatSpace<G>,
    points: &[DVector<f64>],
    cfg: &ClusterConfig,
) -> Result<ClusterResult> {
    cluster(space, points, &with_variant(cfg, Variant::Right))
}

pub fn left_sided_kmeans<G: Generator>(
    space: &DuallyFlatSpace<G>,
    points: &[DVector<f64>],
    cfg: &ClusterConfig,
) -> Result<ClusterResult> {
    cluster(space, points, &with_variant(cfg, Variant::Left))
}

pub fn mixed_kmeans<G: Generator>(
    space: &DuallyFlatSpace<G>,
    points: &[DVector<f64>],
    cfg: &ClusterConfig,
) -> Result<ClusterResult> {
    cluster(space, points, &with_variant(cfg, Variant::Mixed))
}

pub fn jeffreys_kmeans_via_skew<G: Generator>(
    space: &DuallyFlatSpace<G>,
    points: &[DVector<f64>],
    cfg: &ClusterConfig,
    alpha: f64,
) -> Result<ClusterResult> {
    cluster(space, points, &with_variant(cfg, Variant::JeffreysSkew { alpha }))
}
