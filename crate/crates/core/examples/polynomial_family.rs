//! Polynomial exponential families: quadrature cumulants and their MC estimates.

use std::sync::Arc;

use mcig::families::{pef_quadrature_oracle, Component, ExponentialFamily};
use mcig::generators::{build_mc_exponential_generator, Generator};
use mcig::sampling::{draw_sample_set, FamilyRef, Proposal};
use nalgebra::DVector;

fn fmt(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() -> mcig::Result<()> {
    let oracle = pef_quadrature_oracle(&[2, 4, 8])?;
    let theta = DVector::from_vec(vec![-1.0, -1.0, -1.0]);
    let z = oracle.value(&theta)?.exp();
    println!("integral of exp(-x^2 - x^4 - x^8) = {z:.10}");
    println!("mean statistics (x^2, x^4, x^8) = {}", fmt(&oracle.gradient(&theta)?));

    let octic = pef_quadrature_oracle(&[8])?;
    println!("\nF(theta) for t(x) = x^8:");
    for t in [-0.5, -1.0, -2.0, -4.0] {
        println!("  theta = {t:>5}: {:.12}", octic.value(&DVector::from_element(1, t))?);
    }

    let family = ExponentialFamily::polynomial(&[2, 4, 8])?;
    let q = Proposal::from_density(Arc::new(Component::gaussian(0.0, 1.0)?));
    println!("\nMonte Carlo estimates of log Z at theta = (-1, -1, -1):");
    for m in [100, 1_000, 10_000, 100_000] {
        let set = draw_sample_set(&q, m, 3, FamilyRef::Exponential(&family))?;
        let gen = build_mc_exponential_generator(&family, &set)?;
        let f = gen.value_dagger(&theta)?;
        println!("  m = {m:>6}: {f:.6} (quadrature {:.6})", z.ln());
    }
    Ok(())
}
