//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::*;
use mcig::clustering::{mixed_kmeans, ClusterConfig, Seeding, Variant};
use mcig::families::{
    binomial_ef_oracle, gaussian_ef_oracle, pef_quadrature_oracle, Component, ExponentialFamily,
    MixtureFamily, MixtureParam, QuadratureMixtureGenerator, Uniform,
};
use mcig::generators::{
    aggregate_exponential_generators, aggregate_mixture_generators, build_mc_exponential_generator,
    build_mc_mixture_generator, AffineShim, Generator, LinearCombination, MCExponentialGenerator,
    MCMixtureGenerator,
};
use mcig::geometry::{mc_kl_estimate, DuallyFlatSpace, KlVariant};
use mcig::sampling::{
    draw_sample_set, mixture_member_proposal, uniform_mixture_proposal, FamilyRef, Proposal,
};
use nalgebra::DVector;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian_family_sample(m: usize, seed: u64) -> (ExponentialFamily, mcig::sampling::SampleSet) {
    let fam = ExponentialFamily::gaussian();
    let q = Proposal::from_density(Arc::new(Uniform::new(-10.0, 10.0).unwrap()));
    let set = draw_sample_set(&q, m, seed, FamilyRef::Exponential(&fam)).unwrap();
    (fam, set)
}

fn random_normal(r: &mut rand_chacha::ChaCha8Rng) -> (f64, f64) {
    (r.random_range(-2.0..2.0), r.random_range(0.5..1.5))
}

fn c1_gaussian_divergence_recovery() -> Outcome {
    let start = Instant::now();
    let (fam, set) = gaussian_family_sample(100_000, 11);
    let mc = DuallyFlatSpace::new(build_mc_exponential_generator(&fam, &set).unwrap());
    let exact = DuallyFlatSpace::new(gaussian_ef_oracle());
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 20 {
        let (m1, s1) = random_normal(&mut r);
        let (m2, s2) = random_normal(&mut r);
        let kl = gaussian_kl(m1, s1, m2, s2);
        if kl < 0.05 {
            continue;
        }
        let (t1, t2) = (natural(m1, s1), natural(m2, s2));
        // KL(p1 : p2) = B_F(t2 : t1).
        let b_exact = exact.bregman_divergence(&t2, &t1).unwrap();
        ensure(rel(b_exact, kl) < 1e-10, || format!("oracle B {b_exact} vs KL {kl}"))?;
        let b_mc = mc.bregman_divergence(&t2, &t1).unwrap();
        worst = worst.max(rel(b_mc, b_exact));
        pairs += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 0.05, || format!("max relative error {worst:.4} > 0.05"))?;
    ensure(secs <= 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("20 pairs, max rel err {worst:.4}, {secs:.2} s"))
}

fn c2_pef_values() -> Outcome {
    let oracle = pef_quadrature_oracle(&[2, 4, 8]).unwrap();
    let z = oracle.value(&v(&[-1.0, -1.0, -1.0])).unwrap().exp();
    ensure((z - 1.295).abs() <= 1e-3, || format!("integral {z}"))?;
    let octic = pef_quadrature_oracle(&[8]).unwrap();
    let f = octic.value(&v(&[-1.0])).unwrap();
    let expected = 2f64.ln() + statrs::function::gamma::ln_gamma(9.0 / 8.0);
    let err = (f - expected).abs();
    ensure(err <= 1e-8, || format!("F(-1) = {f}, expected {expected}"))?;
    Ok(format!("integral {z:.10}, |F(-1) - log 2 - lnGamma(9/8)| = {err:.1e}"))
}

fn c3_spd_almost_surely() -> Outcome {
    let mut r = rng(303);
    let mut failures = Vec::new();
    let mut min_seen = f64::INFINITY;
    for build in 0..1000 {
        let d = 1 + build % 3;
        if build % 2 == 0 {
            let fam = random_mixture_family(&mut r, d);
            let m = r.random_range(d.max(2)..=50);
            let set = draw_sample_set(
                &uniform_mixture_proposal(&fam),
                m,
                build as u64,
                FamilyRef::Mixture(&fam),
            )
            .unwrap();
            let gen = match build_mc_mixture_generator(&fam, &set) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("mixture build {build}: {e}"));
                    continue;
                }
            };
            for _ in 0..10 {
                let eta = simplex_point(&mut r, d, 1e-3);
                let e = min_eigenvalue(&gen.hessian(&eta).unwrap());
                min_seen = min_seen.min(e);
                if e.is_nan() || e <= 0.0 {
                    failures.push(format!("mixture build {build}: eigenvalue {e:e}"));
                }
            }
        } else {
            let fam = random_polynomial_family(&mut r, d);
            // The Hessian is a weighted covariance of m points, of rank at most m - 1.
            let m = r.random_range((d + 1).max(2)..=50);
            let std = r.random_range(0.5..2.0);
            let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, std).unwrap()));
            let set = draw_sample_set(&q, m, build as u64, FamilyRef::Exponential(&fam)).unwrap();
            let gen = match build_mc_exponential_generator(&fam, &set) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("exponential build {build}: {e}"));
                    continue;
                }
            };
            // Coordinates on the scale of the sample statistics keep every
            // log-weight <theta, t(x_i)> within [-D, D].
            let scale: Vec<f64> = (0..d)
                .map(|j| {
                    set.variates
                        .iter()
                        .map(|&x| fam.stat(x)[j].abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            for _ in 0..10 {
                let th = DVector::from_fn(d, |j, _| r.random_range(-1.0..1.0) / scale[j]);
                let e = min_eigenvalue(&gen.hessian(&th).unwrap());
                min_seen = min_seen.min(e);
                if e.is_nan() || e <= 0.0 {
                    failures.push(format!("exponential build {build}: eigenvalue {e:e}"));
                }
            }
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} failures, first: {}", failures.len(), failures[0])
    })?;
    Ok(format!("1000 builds x 10 points, smallest eigenvalue {min_seen:.3e}"))
}

/// Relative errors of the analytic gradient and Hessian against finite
/// differences with per-axis steps `h / sqrt(1 + H_ii)`.
fn derivative_errors<G: Generator>(g: &G, x: &DVector<f64>, h: f64) -> (f64, f64) {
    let grad = g.gradient(x).unwrap();
    let hess = g.hessian(x).unwrap();
    let steps = DVector::from_fn(x.len(), |i, _| h / (1.0 + hess[(i, i)]).sqrt());
    let fd_g = fd_gradient(|y| g.value(y).unwrap(), x, &steps);
    let fd_h = fd_jacobian(|y| g.gradient(y).unwrap(), x, &steps);
    (rel_vec(&fd_g, &grad), rel_mat(&fd_h, &hess))
}

fn c4_derivative_consistency() -> Outcome {
    let mut r = rng(404);
    let fam = three_component_family();
    let set = draw_sample_set(&uniform_mixture_proposal(&fam), 2000, 4, FamilyRef::Mixture(&fam)).unwrap();
    let mix = build_mc_mixture_generator(&fam, &set).unwrap();
    let ef = ExponentialFamily::polynomial(&[1, 2, 3]).unwrap();
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, 1.5).unwrap()));
    let eset = draw_sample_set(&q, 2000, 4, FamilyRef::Exponential(&ef)).unwrap();
    let exp = build_mc_exponential_generator(&ef, &eset).unwrap();
    let (mut wm, mut we): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let eta = simplex_point(&mut r, 2, 0.05);
        let (a, b) = derivative_errors(&mix, &eta, 1e-3);
        wm = wm.max(a).max(b);
        let th = DVector::from_fn(3, |_, _| r.random_range(-0.5..0.5));
        let (a, b) = derivative_errors(&exp, &th, 1e-3);
        we = we.max(a).max(b);
    }
    ensure(wm <= 1e-6 && we <= 1e-6, || {
        format!("max rel err mixture {wm:.2e}, exponential {we:.2e}")
    })?;
    Ok(format!("100 points each, max rel err mixture {wm:.2e}, exponential {we:.2e}"))
}

fn c5_convergence() -> Outcome {
    let fam = MixtureFamily::from_components(&[
        Component::gaussian(0.0, 3.0).unwrap(),
        Component::gaussian(2.0, 1.0).unwrap(),
    ])
    .unwrap();
    let q = mixture_member_proposal(&fam, &MixtureParam::from_slice(&[0.5]).unwrap()).unwrap();
    let grid: Vec<DVector<f64>> = (0..=90).map(|i| v(&[0.05 + 0.01 * i as f64])).collect();
    let exact = QuadratureMixtureGenerator::new(fam.clone());
    let truth: Vec<f64> = grid.iter().map(|x| exact.value(x).unwrap()).collect();
    let range = truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - truth.iter().cloned().fold(f64::INFINITY, f64::min);
    let sizes = [100usize, 1_000, 10_000, 100_000];
    let mut errors = vec![Vec::new(); sizes.len()];
    for seed in 1..=20u64 {
        let full = draw_sample_set(&q, 100_000, seed, FamilyRef::Mixture(&fam)).unwrap();
        for (k, &m) in sizes.iter().enumerate() {
            let gen = build_mc_mixture_generator(&fam, &full.slice(0, m).unwrap()).unwrap();
            let err = grid
                .iter()
                .zip(&truth)
                .map(|(x, t)| (gen.value(x).unwrap() - t).abs())
                .fold(0.0, f64::max);
            errors[k].push(err);
        }
    }
    let medians: Vec<f64> = errors
        .iter_mut()
        .map(|e| {
            e.sort_by(f64::total_cmp);
            0.5 * (e[9] + e[10])
        })
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let text = medians.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>().join(" > ");
    ensure(decreasing, || format!("medians not decreasing: {text}"))?;
    let last = medians[3] / range;
    ensure(last <= 0.01, || format!("final median error {:.3}% of range", 100.0 * last))?;
    Ok(format!("median max errors {text}; final {:.3}% of range {range:.3}", 100.0 * last))
}

fn c6_aggregation() -> Outcome {
    let fam = three_component_family();
    let set = draw_sample_set(&uniform_mixture_proposal(&fam), 4096 + 37, 6, FamilyRef::Mixture(&fam)).unwrap();
    let ef = ExponentialFamily::polynomial(&[1, 2]).unwrap();
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, 2.0).unwrap()));
    let eset = draw_sample_set(&q, 4096 + 37, 6, FamilyRef::Exponential(&ef)).unwrap();

    let run = || -> Result<Vec<u64>, String> {
        let full = build_mc_mixture_generator(&fam, &set).unwrap();
        let efull = build_mc_exponential_generator(&ef, &eset).unwrap();
        let mut r = rng(606);
        let mut worst: f64 = 0.0;
        let mut bits = Vec::new();
        for parts in [2usize, 8] {
            let blocks = set.split(parts).unwrap();
            let gens: Vec<MCMixtureGenerator> =
                blocks.iter().map(|b| build_mc_mixture_generator(&fam, b).unwrap()).collect();
            let weighted: Vec<(&MCMixtureGenerator, f64)> = gens
                .iter()
                .zip(&blocks)
                .map(|(g, b)| (g, b.len() as f64 / set.len() as f64))
                .collect();
            let agg = aggregate_mixture_generators(&weighted).unwrap();
            let eblocks = eset.split(parts).unwrap();
            let egens: Vec<MCExponentialGenerator> =
                eblocks.iter().map(|b| build_mc_exponential_generator(&ef, b).unwrap()).collect();
            let eweighted: Vec<(&MCExponentialGenerator, f64)> = egens
                .iter()
                .zip(&eblocks)
                .map(|(g, b)| (g, b.len() as f64 / eset.len() as f64))
                .collect();
            let eagg = aggregate_exponential_generators(&eweighted).unwrap();
            for _ in 0..100 {
                let eta = simplex_point(&mut r, 2, 0.01);
                let (a, b) = (agg.value(&eta).unwrap(), full.value(&eta).unwrap());
                worst = worst.max(rel(a, b));
                worst = worst.max(rel_vec(&agg.gradient(&eta).unwrap(), &full.gradient(&eta).unwrap()));
                worst = worst.max(rel_mat(&agg.hessian(&eta).unwrap(), &full.hessian(&eta).unwrap()));
                let th = v(&[r.random_range(-1.0..1.0), r.random_range(-1.0..-0.05)]);
                let (ea, eb) = (eagg.value(&th).unwrap(), efull.value_dagger(&th).unwrap());
                worst = worst.max(rel(ea, eb));
                bits.extend([a.to_bits(), ea.to_bits()]);
            }
        }
        if worst > 1e-12 {
            return Err(format!("max rel err {worst:.2e}"));
        }
        bits.push(worst.to_bits());
        Ok(bits)
    };
    let results: Vec<Result<Vec<u64>, String>> = [1, 2, 8].iter().map(|&t| with_threads(t, run)).collect();
    let first = results[0].clone()?;
    for (t, res) in [2, 8].iter().zip(&results[1..]) {
        let bits = res.clone()?;
        ensure(bits == first, || format!("results differ with {t} threads"))?;
    }
    let worst = f64::from_bits(*first.last().unwrap());
    Ok(format!("2- and 8-way, max rel err {worst:.2e}, bit-identical on 1/2/8 threads"))
}

fn c7_affine_and_linearity() -> Outcome {
    let mut r = rng(707);
    let fam = three_component_family();
    let s1 = draw_sample_set(&uniform_mixture_proposal(&fam), 3000, 1, FamilyRef::Mixture(&fam)).unwrap();
    let s2 = draw_sample_set(&uniform_mixture_proposal(&fam), 3000, 2, FamilyRef::Mixture(&fam)).unwrap();
    let g1 = build_mc_mixture_generator(&fam, &s1).unwrap();
    let g2 = build_mc_mixture_generator(&fam, &s2).unwrap();
    let ef = ExponentialFamily::gaussian();
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.5, 2.0).unwrap()));
    let es = draw_sample_set(&q, 3000, 3, FamilyRef::Exponential(&ef)).unwrap();
    let e_default = build_mc_exponential_generator(&ef, &es).unwrap();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let (p, qq) = (simplex_point(&mut r, 2, 0.02), simplex_point(&mut r, 2, 0.02));
        let base = DuallyFlatSpace::new(&g1);
        let b = base.bregman_divergence(&p, &qq).unwrap();
        let slope = DVector::from_fn(2, |_, _| r.random_range(-1.0..1.0));
        let shim = DuallyFlatSpace::new(AffineShim::new(&g1, slope, r.random_range(-1.0..1.0)).unwrap());
        worst = worst.max(rel(shim.bregman_divergence(&p, &qq).unwrap(), b));

        let (l1, l2) = (r.random_range(0.1..2.0), r.random_range(0.1..2.0));
        let comb = DuallyFlatSpace::new(LinearCombination::new(vec![(l1, &g1), (l2, &g2)]).unwrap());
        let b2 = DuallyFlatSpace::new(&g2).bregman_divergence(&p, &qq).unwrap();
        worst = worst.max(rel(comb.bregman_divergence(&p, &qq).unwrap(), l1 * b + l2 * b2));

        let other = (trial * 61 + 5) % es.len();
        let e_other = DuallyFlatSpace::new(
            MCExponentialGenerator::with_reference(&ef, &es, other).unwrap(),
        );
        let (m1, sd1) = random_normal(&mut r);
        let (m2, sd2) = random_normal(&mut r);
        let (t1, t2) = (natural(m1, sd1), natural(m2, sd2));
        let eb = DuallyFlatSpace::new(&e_default).bregman_divergence(&t1, &t2).unwrap();
        worst = worst.max(rel(e_other.bregman_divergence(&t1, &t2).unwrap(), eb));
    }
    ensure(worst <= 1e-12, || format!("max rel err {worst:.2e}"))?;
    Ok(format!("50 trials x 3 identities, max rel err {worst:.2e}"))
}

fn c8_legendre_round_trips() -> Outcome {
    let mut r = rng(808);
    let gauss = DuallyFlatSpace::new(gaussian_ef_oracle());
    let binom = DuallyFlatSpace::new(binomial_ef_oracle());
    let (mut rt, mut cz, mut dual): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let round_trip = |s: &dyn Fn(&DVector<f64>) -> DVector<f64>, th: &DVector<f64>| {
        (s(th) - th).amax() / (1.0 + th.amax())
    };
    for _ in 0..100 {
        let (t1, t2) = (
            natural(r.random_range(-3.0..3.0), r.random_range(0.3..3.0)),
            natural(r.random_range(-3.0..3.0), r.random_range(0.3..3.0)),
        );
        let back = |t: &DVector<f64>| gauss.primal_coordinates(&gauss.dual_coordinates(t).unwrap()).unwrap();
        rt = rt.max(round_trip(&back, &t1));
        cz = cz.max(gauss.crouzeix_check(&t1).unwrap());
        let (e1, e2) = (gauss.dual_coordinates(&t1).unwrap(), gauss.dual_coordinates(&t2).unwrap());
        let d = gauss.dual_bregman_divergence(&e1, &e2).unwrap();
        dual = dual.max(rel(d, gauss.bregman_divergence(&t2, &t1).unwrap()));

        let (b1, b2) = (v(&[r.random_range(-5.0..5.0)]), v(&[r.random_range(-5.0..5.0)]));
        let back = |t: &DVector<f64>| binom.primal_coordinates(&binom.dual_coordinates(t).unwrap()).unwrap();
        rt = rt.max(round_trip(&back, &b1));
        cz = cz.max(binom.crouzeix_check(&b1).unwrap());
        let (e1, e2) = (binom.dual_coordinates(&b1).unwrap(), binom.dual_coordinates(&b2).unwrap());
        let d = binom.dual_bregman_divergence(&e1, &e2).unwrap();
        dual = dual.max(rel(d, binom.bregman_divergence(&b2, &b1).unwrap()));
    }
    // Monte Carlo spaces.
    let ef = ExponentialFamily::gaussian();
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, 2.0).unwrap()));
    let es = draw_sample_set(&q, 1000, 8, FamilyRef::Exponential(&ef)).unwrap();
    let mc = DuallyFlatSpace::new(build_mc_exponential_generator(&ef, &es).unwrap());
    let fam = three_component_family();
    let ms = draw_sample_set(&uniform_mixture_proposal(&fam), 1000, 8, FamilyRef::Mixture(&fam)).unwrap();
    let mm = DuallyFlatSpace::new(build_mc_mixture_generator(&fam, &ms).unwrap());
    for _ in 0..20 {
        let th = v(&[r.random_range(-1.0..1.0), r.random_range(-1.0..-0.2)]);
        cz = cz.max(mc.crouzeix_check(&th).unwrap());
        let back = |t: &DVector<f64>| mc.primal_coordinates(&mc.dual_coordinates(t).unwrap()).unwrap();
        rt = rt.max(round_trip(&back, &th));
        let eta = simplex_point(&mut r, 2, 0.02);
        cz = cz.max(mm.crouzeix_check(&eta).unwrap());
        let back = |t: &DVector<f64>| mm.primal_coordinates(&mm.dual_coordinates(t).unwrap()).unwrap();
        rt = rt.max(round_trip(&back, &eta));
    }
    ensure(rt <= 1e-8 && cz <= 1e-8 && dual <= 1e-8, || {
        format!("round trip {rt:.2e}, Crouzeix {cz:.2e}, dual divergence {dual:.2e}")
    })?;
    Ok(format!("round trip {rt:.2e}, Crouzeix {cz:.2e}, dual divergence {dual:.2e}"))
}

fn c9_skew_jensen_limit() -> Outcome {
    let s = DuallyFlatSpace::new(gaussian_ef_oracle());
    let mut r = rng(909);
    let mut ratios = Vec::new();
    for _ in 0..10 {
        let p = natural(r.random_range(-2.0..2.0), r.random_range(0.5..1.5));
        let q = natural(r.random_range(-2.0..2.0), r.random_range(0.5..1.5));
        let b = s.bregman_divergence(&q, &p).unwrap();
        let err: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&a| (s.skew_jensen(&p, &q, a).unwrap() / a - b).abs())
            .collect();
        ratios.push(err[0] / err[1]);
        ratios.push(err[1] / err[2]);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| (l.min(*x), h.max(*x)));
    ensure(lo >= 5.0 && hi <= 20.0, || format!("error ratios span [{lo:.3}, {hi:.3}]"))?;
    Ok(format!("10 pairs, successive error ratios in [{lo:.3}, {hi:.3}]"))
}

fn c10_extended_kl() -> Outcome {
    let mut r = rng(1010);
    let mut violations = 0;
    for trial in 0..1000u64 {
        let (m1, s1) = (r.random_range(-3.0..3.0), r.random_range(0.2..3.0));
        let (m2, s2) = (r.random_range(-3.0..3.0), r.random_range(0.2..3.0));
        let p = Component::gaussian(m1, s1).unwrap();
        let q = Component::gaussian(m2, s2).unwrap();
        if mc_kl_estimate(&p, &q, 50, trial, KlVariant::Extended).unwrap() < 0.0 {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} negative extended estimates"))?;
    let p = Component::gaussian(0.0, 1.0).unwrap();
    let q = Component::gaussian(1e-3, 1.0).unwrap();
    let found = (0..100u64).find_map(|seed| {
        let naive = mc_kl_estimate(&p, &q, 100, seed, KlVariant::Naive).unwrap();
        let ext = mc_kl_estimate(&p, &q, 100, seed, KlVariant::Extended).unwrap();
        (naive < 0.0).then_some((seed, naive, ext))
    });
    let (seed, naive, ext) = found.ok_or("naive estimator never negative")?;
    ensure(ext >= 0.0, || format!("extended {ext} at seed {seed}"))?;
    Ok(format!(
        "0/1000 negative; near-identical pair seed {seed}: naive {naive:.2e}, extended {ext:.2e}"
    ))
}

fn c11_mixture_clustering() -> Outcome {
    let fam = three_component_family();
    let points = two_group_points(1111);
    let set = draw_sample_set(&uniform_mixture_proposal(&fam), 100_000, 11, FamilyRef::Mixture(&fam)).unwrap();
    let mc = DuallyFlatSpace::new(build_mc_mixture_generator(&fam, &set).unwrap());
    let cfg = ClusterConfig::new(2, Variant::Mixed, 5).with_seeding(Seeding::KmeansPlusPlus);
    let runs: Vec<_> = [1, 2, 8]
        .iter()
        .map(|&t| with_threads(t, || mixed_kmeans(&mc, &points, &cfg).unwrap()))
        .collect();
    let res = &runs[0];
    ensure(runs.iter().all(|x| x == res), || "runs differ across thread counts".into())?;
    ensure(mixed_kmeans(&mc, &points, &cfg).unwrap() == *res, || "rerun differs".into())?;
    ensure(res.converged && res.iterations <= 100, || {
        format!("converged {} after {} iterations", res.converged, res.iterations)
    })?;
    ensure(
        res.cost_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()),
        || format!("cost history {:?}", res.cost_history),
    )?;
    ensure((0..2).all(|c| res.assignments.contains(&c)), || "empty cluster".into())?;
    let quad = DuallyFlatSpace::new(QuadratureMixtureGenerator::new(fam));
    let exact = mixed_kmeans(&quad, &points, &cfg).unwrap();
    ensure(exact.assignments == res.assignments, || {
        format!("partition {:?} vs quadrature {:?}", res.assignments, exact.assignments)
    })?;
    Ok(format!(
        "assignments {:?}, {} iterations, cost {:.4e}, matches quadrature run",
        res.assignments,
        res.iterations,
        res.cost()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("gaussian-oracle divergence recovery", c1_gaussian_divergence_recovery),
        ("polynomial family oracle values", c2_pef_values),
        ("SPD Hessians across random builds", c3_spd_almost_surely),
        ("derivatives match finite differences", c4_derivative_consistency),
        ("Monte Carlo negentropy convergence", c5_convergence),
        ("aggregation exactness and thread independence", c6_aggregation),
        ("affine invariance and linearity", c7_affine_and_linearity),
        ("Legendre and Crouzeix round trips", c8_legendre_round_trips),
        ("skew Jensen limit", c9_skew_jensen_limit),
        ("extended KL positivity", c10_extended_kl),
        ("mixture clustering reproduction", c11_mixture_clustering),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
