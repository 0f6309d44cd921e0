//! Market fit, calibration and self-memory diagnostics for a fitted
//! kinetic model on the bundled fixture.

use std::path::PathBuf;

use market_ising::kinetic::{calibration_table, fit_kinetic, market_fit_report, self_memory_summary, KineticFitConfig};
use market_ising::network::asymmetry_index;
use market_ising::panel::{binarize, filter_complete, load_prices, CompletenessRule, DateWindow, PriceSource};

fn main() -> market_ising::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let prices = load_prices(&PriceSource::Long(dir.join("prices.csv")))?;
    let (panel, _) = filter_complete(&binarize(&prices), CompletenessRule::DropTickers)?;
    let cfg = KineticFitConfig {
        n_basis: 8,
        ..KineticFitConfig::default()
    };
    let (model, _) = fit_kinetic(&panel, &cfg)?;

    let fit = market_fit_report(&model, &panel, &DateWindow::defaults())?;
    println!("Spearman(predicted, empirical market mean) = {:.3}", fit.spearman_predicted.value);
    println!("h_bar mean {:.4}, std {:.4}", fit.h_bar_mean, fit.h_bar_std);
    for w in &fit.windows {
        println!("  {:<13} {:>5} transitions, mean h_bar {:?}", w.name, w.transitions, w.mean_h_bar.map(|v| (v * 1e4).round() / 1e4));
    }

    let cal = calibration_table(&model, &panel, 20)?;
    println!("\ncalibration (20 bins):");
    for b in cal.bins.iter().filter(|b| b.count > 0) {
        println!("  predicted {:.3}  empirical {:.3}  n = {}", b.midpoint(), b.empirical_freq().unwrap_or(f64::NAN), b.count);
    }

    let mem = self_memory_summary(&model, 3);
    println!("\nself-memory: mean {:.4}, positive fraction {:.2}", mem.mean, mem.fraction_positive);
    println!("top positive {:?}", mem.top_positive);
    println!("asymmetry index {:.3}", asymmetry_index(model.j())?);
    Ok(())
}
