//! Mixed Bregman k-means over eight mixtures of a three-component family.

use mcig::clustering::{cluster, Center, ClusterConfig, Variant};
use mcig::families::{Component, MixtureFamily, QuadratureMixtureGenerator};
use mcig::generators::build_mc_mixture_generator;
use mcig::geometry::DuallyFlatSpace;
use mcig::sampling::{draw_sample_set, uniform_mixture_proposal, FamilyRef};
use nalgebra::DVector;

fn fmt(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() -> mcig::Result<()> {
    let family = MixtureFamily::from_components(&[
        Component::gaussian(-2.0, 1.0)?,
        Component::laplace(0.0, 1.0)?,
        Component::cauchy(2.0, 1.0)?,
    ])?;
    let points: Vec<DVector<f64>> = [
        [0.14, 0.12], [0.19, 0.17], [0.11, 0.18], [0.16, 0.13],
        [0.22, 0.62], [0.17, 0.68], [0.24, 0.66], [0.19, 0.61],
    ]
    .iter()
    .map(|p| DVector::from_column_slice(p))
    .collect();

    let set = draw_sample_set(&uniform_mixture_proposal(&family), 100_000, 11, FamilyRef::Mixture(&family))?;
    let mc = DuallyFlatSpace::new(build_mc_mixture_generator(&family, &set)?);
    let cfg = ClusterConfig::new(2, Variant::Mixed, 5);
    let res = cluster(&mc, &points, &cfg)?;
    println!("assignments {:?}", res.assignments);
    println!("iterations {}, converged {}", res.iterations, res.converged);
    println!("cost history {:?}", res.cost_history);
    for (c, center) in res.centers.iter().enumerate() {
        if let Center::Pair { left, right } = center {
            println!("cluster {c}: left {}, right {}", fmt(left), fmt(right));
        }
    }

    let quad = DuallyFlatSpace::new(QuadratureMixtureGenerator::new(family));
    let exact = cluster(&quad, &points, &cfg)?;
    println!("\nquadrature generator assignments {:?}", exact.assignments);

    for variant in [Variant::Right, Variant::Left, Variant::JeffreysSkew { alpha: 1e-3 }] {
        let r = cluster(&mc, &points, &ClusterConfig::new(2, variant, 5))?;
        println!("{variant:?}: {:?}, cost {:.4e}", r.assignments, r.cost());
    }
    Ok(())
}
