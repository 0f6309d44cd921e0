//! Simulate the kinetic model, refit it, and compare parameters.

use market_ising::kinetic::{fit_kinetic, simulate, HatBasis, KineticFitConfig, KineticIsingModel, PenaltyConfig};
use market_ising::rng::stream;
use ndarray::{Array1, Array2};
use rand::Rng;

fn main() -> market_ising::Result<()> {
    let (n, m, t) = (6, 4, 10_000);
    let mut rng = stream(21, 0);
    let mut draw = |s: f64| s * (2.0 * rng.random::<f64>() - 1.0);
    let gamma = Array2::from_shape_fn((n, m), |_| draw(0.3));
    let a = Array1::from_shape_fn(n, |_| draw(0.2));
    let j = Array2::from_shape_fn((n, n), |(p, q)| if p == q { 0.0 } else { draw(0.3) });
    let truth = KineticIsingModel::new(gamma, a, j, HatBasis::new(m, t)?)?;
    let panel = simulate(&truth, &vec![1; n], t - 1, 22)?;

    let cfg = KineticFitConfig {
        n_basis: m,
        penalties: PenaltyConfig::uniform(1e-6),
        ..KineticFitConfig::default()
    };
    let (fit, traces) = fit_kinetic(&panel, &cfg)?;
    for tr in &traces {
        println!("{}: {} iterations, max |grad| {:.1e}", tr.ticker, tr.iterations, tr.max_abs_gradient);
    }
    let worst = |x: &Array2<f64>, y: &Array2<f64>| (x - y).iter().fold(0.0_f64, |w, v| w.max(v.abs()));
    println!("\nmax |error|: gamma {:.3}, J {:.3}", worst(fit.gamma(), truth.gamma()), worst(fit.j(), truth.j()));
    println!("a true {:.3}", truth.a());
    println!("a fit  {:.3}", fit.a());
    Ok(())
}
