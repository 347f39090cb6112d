//! Primal and dual coordinates, geodesics and the Legendre conjugate.

use mcig::families::{binomial_ef_oracle, gaussian_ef_oracle, GaussianOracle};
use mcig::generators::Generator;
use mcig::geometry::{DuallyFlatSpace, GeodesicKind, JeffreysMode};
use nalgebra::DVector;

fn fmt(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() -> mcig::Result<()> {
    let space = DuallyFlatSpace::new(gaussian_ef_oracle());
    let p = GaussianOracle::natural_from_moments(-1.0, 0.8);
    let q = GaussianOracle::natural_from_moments(2.0, 1.5);

    let eta = space.dual_coordinates(&p)?;
    let inv = space.invert_gradient(&eta, None)?;
    println!("theta      = {}", fmt(&p));
    println!("eta        = {}", fmt(&eta));
    println!("recovered  = {} ({} Newton steps, residual {:.1e})", fmt(&inv.point), inv.iterations, inv.residual);
    println!("Crouzeix deviation {:.1e}", space.crouzeix_check(&p)?);

    println!("\nF*(eta) = {:.8}", space.dual_potential(&eta)?);
    let e2 = space.dual_coordinates(&q)?;
    println!("B_F*(eta_p : eta_q) = {:.8}", space.dual_bregman_divergence(&eta, &e2)?);
    println!("B_F(theta_q : theta_p) = {:.8}", space.bregman_divergence(&q, &p)?);

    println!("\n{:>6} {:>26} {:>26}", "lambda", "primal geodesic (mean, sd)", "dual geodesic (mean, sd)");
    for i in 0..=4 {
        let l = i as f64 / 4.0;
        let a = space.geodesic(&p, &q, l, GeodesicKind::Primal)?;
        let b = space.geodesic(&p, &q, l, GeodesicKind::Dual)?;
        let (ma, sa) = GaussianOracle::moments_from_natural(&a.primal);
        let (mb, sb) = GaussianOracle::moments_from_natural(&b.primal);
        println!("{l:>6.2} {:>26} {:>26}", format!("({ma:.4}, {sa:.4})"), format!("({mb:.4}, {sb:.4})"));
    }

    println!("\nJeffreys exact {:.8}", space.jeffreys_divergence(&p, &q, JeffreysMode::Exact)?);
    for alpha in [1e-1, 1e-2, 1e-3] {
        println!("Jeffreys skew (alpha = {alpha:.0e}) {:.8}", space.jeffreys_divergence(&p, &q, JeffreysMode::Skew(alpha))?);
    }

    let bern = DuallyFlatSpace::new(binomial_ef_oracle());
    for target in [0.5, 0.9, 1.5] {
        match bern.primal_coordinates(&DVector::from_element(1, target)) {
            Ok(t) => println!("\nBernoulli: mean {target} has natural parameter {:.6}", t[0]),
            Err(e) => println!("\nBernoulli: mean {target}: {e}"),
        }
    }
    println!("F''(0) = {}", bern.generator().hessian(&DVector::zeros(1))?[(0, 0)]);
    Ok(())
}
