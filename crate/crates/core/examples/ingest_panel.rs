//! Load the bundled long-format prices, binarize open-to-close moves and
//! apply the completeness filter.

use std::path::PathBuf;

use market_ising::panel::{binarize, breadth_histogram, filter_complete, load_prices, CompletenessRule, PriceSource};
use market_ising::SectorTable;

fn main() -> market_ising::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let prices = load_prices(&PriceSource::Long(dir.join("prices.csv")))?
        .with_sectors(&SectorTable::load(&dir.join("sectors.csv"))?);
    println!(
        "loaded {} days x {} tickers ({} missing opens, {} missing closes)",
        prices.n_days(),
        prices.n_tickers(),
        prices.missing_open(),
        prices.missing_close()
    );

    let (panel, report) = filter_complete(&binarize(&prices), CompletenessRule::DropTickers)?;
    println!("dropped {:?}; panel is {} x {}", report.dropped_tickers, panel.n_days(), panel.n_stocks());

    let hist = breadth_histogram(&panel, 13);
    println!("\nbreadth histogram (T = {}):", hist.total());
    for (b, count) in hist.counts.iter().enumerate() {
        println!("  [{:+.2}, {:+.2})  {}", hist.edges[b], hist.edges[b + 1], "#".repeat((*count as usize).div_ceil(10)));
    }
    Ok(())
}
