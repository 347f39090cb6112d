//! Generators built on blocks of one sample combine into the full-sample generator.

use std::sync::Arc;

use mcig::families::{Component, ExponentialFamily, MixtureFamily};
use mcig::generators::{
    aggregate_exponential_generators, aggregate_mixture_generators, build_mc_exponential_generator,
    build_mc_mixture_generator, Generator,
};
use mcig::sampling::{draw_sample_set, uniform_mixture_proposal, FamilyRef, Proposal};
use nalgebra::DVector;

fn main() -> mcig::Result<()> {
    let family = MixtureFamily::from_components(&[
        Component::gaussian(-2.0, 1.0)?,
        Component::laplace(0.0, 1.0)?,
        Component::cauchy(2.0, 1.0)?,
    ])?;
    let set = draw_sample_set(&uniform_mixture_proposal(&family), 50_000, 5, FamilyRef::Mixture(&family))?;
    let full = build_mc_mixture_generator(&family, &set)?;
    let eta = DVector::from_vec(vec![0.25, 0.4]);

    for parts in [2, 4, 8] {
        let blocks = set.split(parts)?;
        let gens = blocks
            .iter()
            .map(|b| build_mc_mixture_generator(&family, b))
            .collect::<mcig::Result<Vec<_>>>()?;
        let weighted: Vec<_> = gens
            .iter()
            .zip(&blocks)
            .map(|(g, b)| (g, b.len() as f64 / set.len() as f64))
            .collect();
        let agg = aggregate_mixture_generators(&weighted)?;
        let (a, b) = (agg.value(&eta)?, full.value(&eta)?);
        println!("mixture, {parts} blocks: {a:.15} vs {b:.15} (diff {:.1e})", (a - b).abs());
    }

    let ef = ExponentialFamily::gaussian();
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, 2.0)?));
    let eset = draw_sample_set(&q, 50_000, 5, FamilyRef::Exponential(&ef))?;
    let efull = build_mc_exponential_generator(&ef, &eset)?;
    let theta = DVector::from_vec(vec![0.5, -0.7]);
    let blocks = eset.split(4)?;
    let gens = blocks
        .iter()
        .map(|b| build_mc_exponential_generator(&ef, b))
        .collect::<mcig::Result<Vec<_>>>()?;
    let weighted: Vec<_> = gens.iter().map(|g| (g, 0.25)).collect();
    let agg = aggregate_exponential_generators(&weighted)?;
    let (a, b) = (agg.value(&theta)?, efull.value_dagger(&theta)?);
    println!("exponential, 4 blocks: {a:.15} vs {b:.15} (diff {:.1e})", (a - b).abs());
    Ok(())
}
