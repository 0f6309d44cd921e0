//! Regenerates the bundled end-to-end fixture under `tests/fixtures/`.
//!
//! Twelve complete tickers in three sectors follow a kinetic model with
//! sector-block couplings and a slowly varying field; a thirteenth ticker
//! has gaps and is dropped by the completeness filter.
//!
//! ```bash
//! cargo run --release -p market-ising --example make_fixture [OUT_DIR]
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, NaiveDate, Weekday};
use market_ising::kinetic::{simulate, HatBasis, KineticIsingModel};
use market_ising::rng;
use ndarray::{Array1, Array2};
use rand::Rng;

const DAYS: usize = 2000;
const BASIS: usize = 8;
const SEED: u64 = 20_240_601;

const TICKERS: [(&str, &str); 13] = [
    ("BRNT", "Energy"),
    ("CRDX", "Energy"),
    ("DRLQ", "Energy"),
    ("FLRG", "Energy"),
    ("BKNA", "Financials"),
    ("CAPX", "Financials"),
    ("LNDR", "Financials"),
    ("TRST", "Financials"),
    ("CHPS", "Information Technology"),
    ("CODE", "Information Technology"),
    ("NETW", "Information Technology"),
    ("SOFT", "Information Technology"),
    ("GAPY", "Utilities"),
];

fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .collect()
}

fn main() -> market_ising::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures"));
    std::fs::create_dir_all(&out).map_err(|e| market_ising::Error::InvalidInput(e.to_string()))?;

    let n = TICKERS.len() - 1;
    let mut r = rng::stream(SEED, 0);
    let block = |i: usize| i / 4;
    let j = Array2::from_shape_fn((n, n), |(a, b)| {
        if a == b {
            0.0
        } else if block(a) == block(b) {
            0.12 + 0.04 * r.random::<f64>()
        } else {
            0.04 * (r.random::<f64>() - 0.5)
        }
    });
    let a = Array1::from_shape_fn(n, |_| 0.1 * (r.random::<f64>() - 0.5));
    let regime: Vec<f64> = (0..BASIS).map(|_| 0.3 * (r.random::<f64>() - 0.5)).collect();
    let gamma = Array2::from_shape_fn((n, BASIS), |(_, m)| regime[m] + 0.05 * (r.random::<f64>() - 0.5));
    let model = KineticIsingModel::new(gamma, a, j, HatBasis::new(BASIS, DAYS)?)?;
    let s0: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    let panel = simulate(&model, &s0, DAYS - 1, SEED)?;

    let dates = business_days(NaiveDate::from_ymd_opt(1996, 1, 2).expect("valid"), DAYS);
    let mut prices = String::from("date,ticker,open,close\n");
    let mut level = vec![50.0_f64; TICKERS.len()];
    let mut pr = rng::stream(SEED, 1);
    for (t, date) in dates.iter().enumerate() {
        for (i, (ticker, _)) in TICKERS.iter().enumerate() {
            let spin = if i < n { panel.spins()[(t, i)] } else if pr.random::<bool>() { 1 } else { -1 };
            // The gapped ticker misses one day in fifty.
            if i == n && t % 50 == 17 {
                continue;
            }
            let open = level[i];
            // At least 0.2%, so four-decimal rounding never flips a move.
            let size = 0.002 + 0.02 * pr.random::<f64>();
            // Roughly one down day in twenty is an exact tie.
            let close = match spin {
                1 => open * (1.0 + size),
                _ if pr.random::<f64>() < 0.05 => open,
                _ => open * (1.0 - size),
            };
            let _ = writeln!(prices, "{date},{ticker},{open:.4},{close:.4}");
            level[i] = (close * (1.0 + 0.004 * (pr.random::<f64>() - 0.5))).max(1.0);
        }
    }
    let mut sectors = String::from("ticker,sector\n");
    for (ticker, sector) in TICKERS {
        let _ = writeln!(sectors, "{ticker},{sector}");
    }
    let write = |name: &str, text: &str| {
        std::fs::write(out.join(name), text).map_err(|e| market_ising::Error::InvalidInput(e.to_string()))
    };
    write("prices.csv", &prices)?;
    write("sectors.csv", &sectors)?;
    println!("wrote {} days x {} tickers to {}", DAYS, TICKERS.len(), out.display());
    Ok(())
}
