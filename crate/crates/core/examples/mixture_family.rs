//! Mixture families: densities, proposals and cached sample sets.
//!
//! Run with `cargo run --example mixture_family`.

use mcig::families::{mixture_log_density, Component, MixtureFamily, MixtureParam};
use mcig::sampling::{draw_sample_set, mixture_member_proposal, uniform_mixture_proposal, FamilyRef};

fn main() -> mcig::Result<()> {
    let family = MixtureFamily::from_components(&[
        Component::gaussian(-2.0, 1.0)?,
        Component::laplace(0.0, 1.0)?,
        Component::cauchy(2.0, 1.0)?,
    ])?;
    println!("family {} of order {}", family.fingerprint(), family.order());
    println!("components: {}", family.labels().join(", "));

    let eta = MixtureParam::from_slice(&[0.3, 0.5])?;
    println!("\nweights {:?}", eta.full_weights());
    for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        println!("  log m({x:>4}) = {:.6}", mixture_log_density(&family, &eta, x)?);
    }

    let uniform = uniform_mixture_proposal(&family);
    let member = mixture_member_proposal(&family, &eta)?;
    for q in [&uniform, &member] {
        let set = draw_sample_set(q, 10_000, 7, FamilyRef::Mixture(&family))?;
        let lo = set.variates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = set.variates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("\nproposal {}", q.label());
        println!("  m = {}, seed = {}, rng = {}", set.len(), set.seed, set.rng);
        println!("  support of the draw: [{lo:.2}, {hi:.2}]");
        println!("  first variates: {:?}", &set.variates[..3]);
    }
    Ok(())
}
