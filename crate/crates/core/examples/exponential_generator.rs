//! The Monte Carlo cumulant of the normal family against its closed form.

use std::sync::Arc;

use mcig::families::{gaussian_ef_oracle, ExponentialFamily, GaussianOracle, Uniform};
use mcig::generators::{build_mc_exponential_generator, Generator};
use mcig::geometry::DuallyFlatSpace;
use mcig::sampling::{draw_sample_set, FamilyRef, Proposal};

fn main() -> mcig::Result<()> {
    let family = ExponentialFamily::gaussian();
    let q = Proposal::from_density(Arc::new(Uniform::new(-10.0, 10.0)?));
    let set = draw_sample_set(&q, 100_000, 11, FamilyRef::Exponential(&family))?;
    let gen = build_mc_exponential_generator(&family, &set)?;
    println!("{} variates, reference variate {:?}", gen.sample_size(), gen.reference());

    let mc = DuallyFlatSpace::new(&gen);
    let exact = DuallyFlatSpace::new(gaussian_ef_oracle());
    let pairs = [((0.0, 1.0), (1.0, 1.0)), ((-1.0, 0.7), (1.5, 1.3)), ((0.5, 2.0), (0.0, 0.8))];
    println!("\n{:>22} {:>22} {:>10} {:>10} {:>8}", "p", "q", "MC", "exact", "rel");
    for ((m1, s1), (m2, s2)) in pairs {
        let p = GaussianOracle::natural_from_moments(m1, s1);
        let r = GaussianOracle::natural_from_moments(m2, s2);
        // KL(p : r) is the divergence with swapped natural parameters.
        let a = mc.bregman_divergence(&r, &p)?;
        let b = exact.bregman_divergence(&r, &p)?;
        println!(
            "{:>22} {:>22} {a:>10.5} {b:>10.5} {:>8.2e}",
            format!("N({m1}, {s1}^2)"),
            format!("N({m2}, {s2}^2)"),
            (a - b).abs() / b
        );
    }

    let theta = GaussianOracle::natural_from_moments(0.3, 1.2);
    let gap = gen.value_dagger(&theta)? - gaussian_ef_oracle().value(&theta)?;
    println!("\nF_dagger(theta) - F(theta) = {gap:.3e} at N(0.3, 1.2^2)");
    Ok(())
}
