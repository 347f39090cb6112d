//! Monte Carlo negentropy generators converging to the quadrature value.
//!
//! The family is `(1 - eta) N(0, 3^2) + eta N(2, 1)` and every generator
//! reuses a prefix of one sample drawn from the `eta = 1/2` member.

use mcig::families::{Component, MixtureFamily, MixtureParam, QuadratureMixtureGenerator};
use mcig::generators::{build_mc_mixture_generator, Generator};
use mcig::sampling::{draw_sample_set, mixture_member_proposal, FamilyRef};
use nalgebra::DVector;

fn main() -> mcig::Result<()> {
    let family = MixtureFamily::from_components(&[
        Component::gaussian(0.0, 3.0)?,
        Component::gaussian(2.0, 1.0)?,
    ])?;
    let q = mixture_member_proposal(&family, &MixtureParam::from_slice(&[0.5])?)?;
    let sizes = [10, 100, 1_000, 10_000, 100_000];
    let full = draw_sample_set(&q, *sizes.last().unwrap(), 1, FamilyRef::Mixture(&family))?;
    let exact = QuadratureMixtureGenerator::new(family.clone());

    let gens = sizes
        .iter()
        .map(|&m| build_mc_mixture_generator(&family, &full.slice(0, m)?))
        .collect::<mcig::Result<Vec<_>>>()?;

    print!("{:>6}", "eta");
    for m in sizes {
        print!("{:>12}", format!("m={m}"));
    }
    println!("{:>12}", "quadrature");
    let mut worst = vec![0.0f64; sizes.len()];
    for i in 1..=9 {
        let eta = DVector::from_element(1, i as f64 / 10.0);
        let g = exact.value(&eta)?;
        print!("{:>6.2}", eta[0]);
        for (j, gen) in gens.iter().enumerate() {
            let v = gen.value(&eta)?;
            worst[j] = worst[j].max((v - g).abs());
            print!("{v:>12.6}");
        }
        println!("{g:>12.6}");
    }
    print!("{:>6}", "error");
    for w in worst {
        print!("{w:>12.2e}");
    }
    println!();
    Ok(())
}
