mod common;

use std::sync::Arc;

use common::*;
use mcig::families::{
    binomial_ef_oracle, gaussian_ef_oracle, Component, Density, ExponentialFamily, MixtureFamily,
    QuadratureMixtureGenerator,
};
use mcig::generators::{build_mc_exponential_generator, build_mc_mixture_generator, Generator};
use mcig::geometry::{mc_kl_estimate, DuallyFlatSpace, GeodesicKind, JeffreysMode, KlVariant};
use mcig::sampling::{draw_sample_set, mixture_member_proposal, FamilyRef, Proposal};
use mcig::families::MixtureParam;
use mcig::Error;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn two_gaussians() -> MixtureFamily {
    MixtureFamily::from_components(&[
        Component::gaussian(0.0, 3.0).unwrap(),
        Component::gaussian(2.0, 1.0).unwrap(),
    ])
    .unwrap()
}

fn gaussian_space() -> DuallyFlatSpace<mcig::families::GaussianOracle> {
    DuallyFlatSpace::new(gaussian_ef_oracle())
}

fn arb_normal() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.3..3.0f64)
}

#[test]
fn kl_between_mixtures_is_the_negentropy_divergence() {
    let quad = QuadratureMixtureGenerator::new(two_gaussians());
    let space = DuallyFlatSpace::new(&quad);
    for (a, b) in [(0.1, 0.9), (0.5, 0.3), (0.05, 0.06), (0.8, 0.2), (0.95, 0.5)] {
        let (ea, eb) = (v(&[a]), v(&[b]));
        let kl = quad.kl(&ea, &eb).unwrap();
        let bd = space.bregman_divergence(&ea, &eb).unwrap();
        assert!((kl - bd).abs() <= 1e-6, "eta {a} : {b}: KL {kl}, B {bd}");
    }
}

#[test]
fn monte_carlo_divergence_approaches_the_quadrature_value() {
    let fam = two_gaussians();
    let quad = DuallyFlatSpace::new(QuadratureMixtureGenerator::new(fam.clone()));
    let q = mixture_member_proposal(&fam, &MixtureParam::from_slice(&[0.5]).unwrap()).unwrap();
    let pairs = [(0.1, 0.9), (0.3, 0.6), (0.8, 0.2)];
    let mean_err = |m: usize| {
        let mut total = 0.0;
        for seed in 0..8 {
            let set = draw_sample_set(&q, m, seed, FamilyRef::Mixture(&fam)).unwrap();
            let mc = DuallyFlatSpace::new(build_mc_mixture_generator(&fam, &set).unwrap());
            for (a, b) in pairs {
                let (ea, eb) = (v(&[a]), v(&[b]));
                total += (mc.bregman_divergence(&ea, &eb).unwrap()
                    - quad.bregman_divergence(&ea, &eb).unwrap())
                .abs();
            }
        }
        total / 24.0
    };
    let errs: Vec<f64> = [100, 10_000, 100_000].into_iter().map(mean_err).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 5e-3, "{errs:?}");
}

#[test]
fn gaussian_divergence_example() {
    let s = gaussian_space();
    let (t1, t2) = (v(&[0.0, -0.5]), v(&[2.0, -0.5]));
    let b = s.bregman_divergence(&t2, &t1).unwrap();
    assert!((b - gaussian_kl(2.0, 1.0, 0.0, 1.0)).abs() < 1e-12);
    assert!((b - 2.0).abs() < 1e-12);
    assert_eq!(s.bregman_divergence(&t1, &t1).unwrap(), 0.0);
}

#[test]
fn binomial_inversion_and_crouzeix() {
    let s = DuallyFlatSpace::new(binomial_ef_oracle());
    assert!(s.primal_coordinates(&v(&[0.5])).unwrap()[0].abs() < 1e-12);
    for bad in [-1e-3, -0.3, 1.0 + 1e-6, 1.7] {
        assert!(matches!(
            s.primal_coordinates(&v(&[bad])),
            Err(Error::NoSolution { .. })
        ));
    }
    let h = s.generator().hessian(&v(&[0.0])).unwrap()[(0, 0)];
    assert!((h - 0.25).abs() < 1e-15);
    assert!(s.crouzeix_check(&v(&[0.0])).unwrap() < 1e-14);
}

#[test]
fn crouzeix_on_a_monte_carlo_exponential_space() {
    let fam = ExponentialFamily::polynomial(&[1, 2]).unwrap();
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, 1.5).unwrap()));
    let set = draw_sample_set(&q, 1000, 12, FamilyRef::Exponential(&fam)).unwrap();
    let s = DuallyFlatSpace::new(build_mc_exponential_generator(&fam, &set).unwrap());
    let mut r = rng(12);
    for _ in 0..20 {
        let th = v(&[r.random_range(-1.0..1.0), r.random_range(-0.5..0.5)]);
        let dev = s.crouzeix_check(&th).unwrap();
        assert!(dev <= 1e-8, "{th:?}: {dev:e}");
    }
}

#[test]
fn skew_jeffreys_tracks_the_exact_value() {
    let s = gaussian_space();
    let mut r = rng(5);
    let mut checked = 0;
    while checked < 50 {
        let p = natural(r.random_range(-2.0..2.0), r.random_range(0.5..2.0));
        let q = natural(r.random_range(-2.0..2.0), r.random_range(0.5..2.0));
        let exact = s.jeffreys_divergence(&p, &q, JeffreysMode::Exact).unwrap();
        if exact < 0.1 {
            continue;
        }
        let skew = s.jeffreys_divergence(&p, &q, JeffreysMode::Skew(1e-3)).unwrap();
        assert!(rel(skew, exact) <= 0.01, "{skew} vs {exact}");
        checked += 1;
    }
    assert_eq!(s.jeffreys_divergence(&v(&[0.3, -1.0]), &v(&[0.3, -1.0]), JeffreysMode::Exact).unwrap(), 0.0);
}

#[test]
fn jeffreys_equals_inner_product_of_differences() {
    let s = gaussian_space();
    let mut r = rng(6);
    for _ in 0..100 {
        let p = natural(r.random_range(-2.0..2.0), r.random_range(0.5..2.0));
        let q = natural(r.random_range(-2.0..2.0), r.random_range(0.5..2.0));
        let j = s.jeffreys_divergence(&p, &q, JeffreysMode::Exact).unwrap();
        let dp = s.dual_coordinates(&p).unwrap() - s.dual_coordinates(&q).unwrap();
        let inner = (&p - &q).dot(&dp);
        assert!(rel(j, inner) <= 1e-10);
    }
}

#[test]
fn monte_carlo_kl_of_two_gaussians() {
    // q/p has finite variance under p only when 2 s_p^2 > s_q^2.
    let p = Component::gaussian(0.0, 1.5).unwrap();
    let q = Component::gaussian(1.0, 1.0).unwrap();
    let exact = gaussian_kl(0.0, 1.5, 1.0, 1.0);
    for variant in [KlVariant::Naive, KlVariant::Extended] {
        let est = mc_kl_estimate(&p, &q, 100_000, 77, variant).unwrap();
        assert!(rel(est, exact) <= 0.03, "{variant:?}: {est} vs {exact}");
    }
}

#[test]
fn extended_kl_is_nonnegative_over_random_pairs() {
    let mut r = rng(10);
    for seed in 0..1000 {
        let p = Component::gaussian(r.random_range(-1.0..1.0), r.random_range(0.5..1.5)).unwrap();
        let q = Component::gaussian(r.random_range(-1.0..1.0), r.random_range(0.5..1.5)).unwrap();
        let m = r.random_range(1..200);
        let e = mc_kl_estimate(&p, &q, m, seed, KlVariant::Extended).unwrap();
        assert!(e >= 0.0, "{} / {}: {e}", p.label(), q.label());
    }
}

#[test]
fn kl_estimate_reports_the_offending_variate() {
    let p = Component::cauchy(0.0, 1.0).unwrap();
    let q = mcig::families::Uniform::new(-1.0, 1.0).unwrap();
    match mc_kl_estimate(&p, &q, 1000, 1, KlVariant::Naive) {
        Err(Error::NonFinite { x, .. }) => assert!(x.abs() >= 1.0),
        other => panic!("expected a non-finite error, got {other:?}"),
    }
}

#[test]
fn dual_geodesic_midpoint_is_consistent() {
    let s = gaussian_space();
    let (p, q) = (natural(-1.0, 0.7), natural(1.5, 2.0));
    let mid = s.geodesic(&p, &q, 0.5, GeodesicKind::Dual).unwrap();
    let ep = s.dual_coordinates(&p).unwrap();
    let eq = s.dual_coordinates(&q).unwrap();
    assert!(rel_vec(&mid.dual, &((ep + eq) * 0.5)) < 1e-15);
    let forward = s.dual_coordinates(&mid.primal).unwrap();
    assert!((forward - &mid.dual).amax() <= 1e-8 * (1.0 + mid.dual.amax()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn primal_dual_round_trip((m, s) in arb_normal()) {
        let space = gaussian_space();
        let th = natural(m, s);
        let eta = space.dual_coordinates(&th).unwrap();
        let back = space.primal_coordinates(&eta).unwrap();
        prop_assert!((&back - &th).norm() <= 1e-8 * (1.0 + th.norm()));
    }

    #[test]
    fn divergence_is_positive_off_the_diagonal(a in arb_normal(), b in arb_normal()) {
        prop_assume!((a.0 - b.0).abs() + (a.1 - b.1).abs() > 1e-3);
        let s = gaussian_space();
        let (p, q) = (natural(a.0, a.1), natural(b.0, b.1));
        prop_assert!(s.bregman_divergence(&p, &q).unwrap() > 0.0);
        let kl = gaussian_kl(b.0, b.1, a.0, a.1);
        prop_assert!(rel(s.bregman_divergence(&p, &q).unwrap(), kl) <= 1e-9);
    }

    #[test]
    fn dual_divergence_swaps_arguments(a in arb_normal(), b in arb_normal()) {
        prop_assume!((a.0 - b.0).abs() + (a.1 - b.1).abs() > 1e-2);
        let s = gaussian_space();
        let (t1, t2) = (natural(a.0, a.1), natural(b.0, b.1));
        let e1 = s.dual_coordinates(&t1).unwrap();
        let e2 = s.dual_coordinates(&t2).unwrap();
        let dual = s.dual_bregman_divergence(&e1, &e2).unwrap();
        let primal = s.bregman_divergence(&t2, &t1).unwrap();
        prop_assert!(rel(dual, primal) <= 1e-8, "{} vs {}", dual, primal);
    }

    #[test]
    fn geodesics_hit_their_endpoints(a in arb_normal(), b in arb_normal(), lambda in 0.0..=1.0f64) {
        let s = gaussian_space();
        let (p, q) = (natural(a.0, a.1), natural(b.0, b.1));
        for kind in [GeodesicKind::Primal, GeodesicKind::Dual] {
            let start = s.geodesic(&p, &q, 0.0, kind).unwrap();
            let end = s.geodesic(&p, &q, 1.0, kind).unwrap();
            prop_assert_eq!(&start.primal, &p);
            prop_assert_eq!(&end.primal, &q);
            prop_assert_eq!(start.dual, s.dual_coordinates(&p).unwrap());
            prop_assert_eq!(end.dual, s.dual_coordinates(&q).unwrap());
        }
        let pt = s.geodesic(&p, &q, lambda, GeodesicKind::Primal).unwrap();
        let line: DVector<f64> = &p * (1.0 - lambda) + &q * lambda;
        prop_assert!((pt.primal - line).amax() <= 1e-15 * (1.0 + p.amax().max(q.amax())));
    }

    #[test]
    fn skew_jensen_is_nonnegative_and_symmetric_at_half(a in arb_normal(), b in arb_normal(), alpha in 0.01..0.99f64) {
        let s = gaussian_space();
        let (p, q) = (natural(a.0, a.1), natural(b.0, b.1));
        prop_assert!(s.skew_jensen(&p, &q, alpha).unwrap() >= 0.0);
        prop_assert_eq!(s.skew_jensen(&p, &p, alpha).unwrap(), 0.0);
        let (x, y) = (s.skew_jensen(&p, &q, 0.5).unwrap(), s.skew_jensen(&q, &p, 0.5).unwrap());
        prop_assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()));
    }

    #[test]
    fn naive_and_extended_vanish_for_equal_densities((m, s) in arb_normal(), seed in any::<u64>()) {
        let p = Component::gaussian(m, s).unwrap();
        prop_assert_eq!(mc_kl_estimate(&p, &p, 64, seed, KlVariant::Naive).unwrap(), 0.0);
        prop_assert_eq!(mc_kl_estimate(&p, &p, 64, seed, KlVariant::Extended).unwrap(), 0.0);
    }
}

#[test]
fn out_of_domain_parameters_are_rejected() {
    let s = gaussian_space();
    assert!(matches!(
        s.bregman_divergence(&v(&[0.0, 0.5]), &v(&[0.0, -0.5])),
        Err(Error::Domain(_))
    ));
    let d: &dyn Density = &Component::gaussian(0.0, 1.0).unwrap();
    assert!(matches!(mc_kl_estimate(d, d, 0, 0, KlVariant::Naive), Err(Error::Precondition(_))));
}
