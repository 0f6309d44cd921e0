//! Run every stage on the bundled fixture into a temporary directory and
//! print the summary table.

use std::path::PathBuf;

use market_ising::app::{self, RunConfig, Summary};

fn main() -> market_ising::Result<()> {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/run.toml");
    let mut cfg = RunConfig::load(&config)?;
    let out = std::env::temp_dir().join("market-ising-full-pipeline");
    cfg.run.out = out.clone();
    for report in app::run_pipeline(&cfg)? {
        println!("{:<12} {} files", report.stage.name(), report.files.len());
    }
    let text = std::fs::read_to_string(out.join(app::SUMMARY_FILE)).expect("summary written");
    let summary = Summary::from_csv(&text)?;
    let mut section = String::new();
    for row in summary.rows() {
        if row.section != section {
            section.clone_from(&row.section);
            println!("\n{section}");
        }
        let label = match row.rank {
            Some(k) => format!("{} #{k}", row.row),
            None => row.row.clone(),
        };
        println!("  {label:<70} {}", row.value);
    }
    println!("\noutputs in {}", out.display());
    Ok(())
}
