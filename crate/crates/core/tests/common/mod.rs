#![allow(dead_code)]

use std::sync::Arc;

use mcig::families::{Component, Density, ExponentialFamily, MixtureFamily};
use mcig::generators::Generator;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed-form `KL(N(m1, s1^2) : N(m2, s2^2))`.
pub fn gaussian_kl(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    (s2 / s1).ln() + (s1 * s1 + (m1 - m2).powi(2)) / (2.0 * s2 * s2) - 0.5
}

/// Natural parameter of `N(mean, std^2)` for `t(x) = (x, x^2)`.
pub fn natural(mean: f64, std: f64) -> DVector<f64> {
    v(&[mean / (std * std), -0.5 / (std * std)])
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn rel_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

pub fn rel_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Five-point central difference of a scalar function, step `h[i]` along axis `i`.
pub fn fd_gradient<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x: &DVector<f64>,
    h: &DVector<f64>,
) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = h[i];
        let at = |s: f64| {
            let mut y = x.clone();
            y[i] += s * h;
            f(&y)
        };
        g[i] = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h);
    }
    g
}

/// Five-point central difference Jacobian of a vector function.
pub fn fd_jacobian<F: Fn(&DVector<f64>) -> DVector<f64>>(
    f: F,
    x: &DVector<f64>,
    h: &DVector<f64>,
) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    for c in 0..n {
        let h = h[c];
        let at = |s: f64| {
            let mut y = x.clone();
            y[c] += s * h;
            f(&y)
        };
        let col = (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h);
        j.set_column(c, &col);
    }
    j
}

pub fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigenvalues().min()
}

/// Uniform point of the open simplex of dimension `d`, at least `margin` from its faces.
pub fn simplex_point(r: &mut ChaCha8Rng, d: usize, margin: f64) -> DVector<f64> {
    let e: Vec<f64> = (0..=d).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    let scale = 1.0 - (d + 1) as f64 * margin;
    DVector::from_iterator(d, e[1..].iter().map(|x| margin + scale * x / total))
}

pub fn random_component(r: &mut ChaCha8Rng) -> Component {
    let loc = r.random_range(-3.0..3.0);
    let scale = r.random_range(0.5..2.0);
    match r.random_range(0..3) {
        0 => Component::gaussian(loc, scale).unwrap(),
        1 => Component::laplace(loc, scale).unwrap(),
        _ => Component::cauchy(loc, scale).unwrap(),
    }
}

pub fn random_mixture_family(r: &mut ChaCha8Rng, d: usize) -> MixtureFamily {
    let comps: Vec<Arc<dyn Density>> = (0..=d)
        .map(|_| Arc::new(random_component(r)) as Arc<dyn Density>)
        .collect();
    MixtureFamily::new(comps).unwrap()
}

pub fn random_polynomial_family(r: &mut ChaCha8Rng, d: usize) -> ExponentialFamily {
    let mut powers: Vec<u32> = Vec::new();
    while powers.len() < d {
        let p = r.random_range(1..=4);
        if !powers.contains(&p) {
            powers.push(p);
        }
    }
    ExponentialFamily::polynomial(&powers).unwrap()
}

/// Runs `f` inside a dedicated rayon pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

/// Gaussian, Laplace and Cauchy components: a mixture family of order 2.
pub fn three_component_family() -> MixtureFamily {
    MixtureFamily::from_components(&[
        Component::gaussian(-2.0, 1.0).unwrap(),
        Component::laplace(0.0, 1.0).unwrap(),
        Component::cauchy(2.0, 1.0).unwrap(),
    ])
    .unwrap()
}

/// Eight mixture weights in two groups of four.
pub fn two_group_points(seed: u64) -> Vec<DVector<f64>> {
    let mut r = rng(seed);
    let centers = [[0.15, 0.15], [0.2, 0.65]];
    let mut pts = Vec::new();
    for c in centers {
        for _ in 0..4 {
            pts.push(v(&[
                c[0] + r.random_range(-0.05..0.05),
                c[1] + r.random_range(-0.05..0.05),
            ]));
        }
    }
    pts
}

pub fn check_generator_finite<G: Generator>(g: &G, x: &DVector<f64>) -> bool {
    g.value(x).map(f64::is_finite).unwrap_or(false)
}
