//! Fit a static model to a panel sampled from known parameters, once with
//! exact moments and once with the Monte Carlo estimator.

use market_ising::panel::empirical_moments;
use market_ising::rng::stream;
use market_ising::static_model::{exact_moments, fit_static, sample_chain, GibbsConfig, StaticFitConfig, StaticIsingModel};
use market_ising::SpinPanel;
use ndarray::{Array1, Array2};
use rand::Rng;

fn main() -> market_ising::Result<()> {
    let n = 7;
    let mut rng = stream(11, 0);
    let h = Array1::from_shape_fn(n, |_| 0.3 * (rng.random::<f64>() - 0.5));
    let mut j = Array2::zeros((n, n));
    for a in 0..n {
        for b in a + 1..n {
            j[(a, b)] = 0.4 * (rng.random::<f64>() - 0.3);
            j[(b, a)] = j[(a, b)];
        }
    }
    let truth = StaticIsingModel::new(h, j)?;
    let draws = GibbsConfig {
        n_chains: 4,
        sweeps_per_sample: 5,
        n_samples: 5_000,
        seed: 12,
        ..GibbsConfig::default()
    };
    let panel = SpinPanel::synthetic(sample_chain(&truth, &draws)?)?;
    let target = empirical_moments(&panel);

    for exact in [true, false] {
        let cfg = StaticFitConfig {
            exact,
            max_iterations: 3_000,
            tolerance: if exact { 1e-6 } else { 0.01 },
            ..StaticFitConfig::default()
        };
        let (fit, trace) = fit_static(&target, &cfg)?;
        let residual = target.max_abs_residual(&exact_moments(&fit)?);
        let err_j = (fit.j() - truth.j()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        println!(
            "{:<11} {} iterations, converged {}, moment residual {:.4}, max |J error| {:.3}",
            if exact { "exact:" } else { "monte carlo:" },
            trace.rows.len(),
            trace.converged,
            residual,
            err_j
        );
    }
    println!("(J errors include the sampling noise of a {}-day panel)", panel.n_days());
    Ok(())
}
