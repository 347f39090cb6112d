//! Naive and extended Monte Carlo estimates of the Kullback-Leibler divergence.

use mcig::families::Component;
use mcig::geometry::{mc_kl_estimate, KlVariant};

fn exact(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    (s2 / s1).ln() + (s1 * s1 + (m1 - m2).powi(2)) / (2.0 * s2 * s2) - 0.5
}

fn main() -> mcig::Result<()> {
    let p = Component::gaussian(0.0, 1.5)?;
    let q = Component::gaussian(1.0, 1.0)?;
    println!("KL(N(0, 1.5^2) : N(1, 1)) = {:.6}", exact(0.0, 1.5, 1.0, 1.0));
    for m in [100, 1_000, 10_000, 100_000] {
        let naive = mc_kl_estimate(&p, &q, m, 3, KlVariant::Naive)?;
        let ext = mc_kl_estimate(&p, &q, m, 3, KlVariant::Extended)?;
        println!("  m = {m:>6}: naive {naive:.6}, extended {ext:.6}");
    }

    let p = Component::gaussian(0.0, 1.0)?;
    let q = Component::gaussian(0.001, 1.0)?;
    println!("\nnearly identical pair, exact {:.3e}", exact(0.0, 1.0, 0.001, 1.0));
    let mut negative = 0;
    for seed in 0..100 {
        let naive = mc_kl_estimate(&p, &q, 1000, seed, KlVariant::Naive)?;
        let ext = mc_kl_estimate(&p, &q, 1000, seed, KlVariant::Extended)?;
        if naive < 0.0 {
            negative += 1;
        }
        if seed < 4 {
            println!("  seed {seed}: naive {naive:>11.3e}, extended {ext:.3e}");
        }
    }
    println!("naive estimate negative for {negative} of 100 seeds; extended never is");
    Ok(())
}
