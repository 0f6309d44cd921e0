//! Heat-bath Gibbs sampling checked against exact moments, and the model's
//! breadth distribution.

use market_ising::static_model::{exact_moments, model_breadth_distribution, model_moments_mc, GibbsConfig, StaticIsingModel};
use ndarray::{Array1, Array2};

fn main() -> market_ising::Result<()> {
    let n = 8;
    // Uniform ferromagnet: strong enough coupling makes breadth bimodal.
    let j = Array2::from_shape_fn((n, n), |(a, b)| if a == b { 0.0 } else { 0.15 });
    let model = StaticIsingModel::new(Array1::zeros(n), j)?;
    let exact = exact_moments(&model)?;

    for samples in [1_000, 10_000, 100_000] {
        let cfg = GibbsConfig {
            n_samples: samples,
            seed: 1,
            ..GibbsConfig::default()
        };
        let mc = model_moments_mc(&model, &cfg)?;
        println!(
            "{:>7} samples/chain: max |moment error| = {:.4}",
            samples,
            exact.max_abs_residual(&mc)
        );
    }

    let cfg = GibbsConfig {
        n_samples: 50_000,
        ..GibbsConfig::default()
    };
    let hist = model_breadth_distribution(&model, &cfg, 9)?;
    println!("\nbreadth distribution:");
    for (b, &c) in hist.counts.iter().enumerate() {
        let frac = c as f64 / hist.total() as f64;
        println!("  {:+.2}  {:5.3} {}", 0.5 * (hist.edges[b] + hist.edges[b + 1]), frac, "*".repeat((frac * 80.0) as usize));
    }
    Ok(())
}
