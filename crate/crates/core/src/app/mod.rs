//! The `market-ising` command: configuration, stage commands, the summary
//! table and SVG charts.

pub mod charts;
pub mod cli;
mod commands;
pub mod config;
pub mod outputs;
pub mod summary;

pub use charts::cmd_charts;
pub use commands::{
    cmd_analyze, cmd_fit_kinetic, cmd_fit_static, cmd_ingest, cmd_validate_config, run_pipeline, run_stage,
    IngestReport, StageReport, INGEST_REPORT_FILE, KINETIC_MODEL_FILE, PANEL_FILE, PANEL_SECTORS_FILE,
    STATIC_MODEL_FILE, SUMMARY_FILE,
};
pub use config::{AnalysisConfig, InputConfig, Overrides, PriceFormat, RunConfig, RunSection, Stage};
pub use summary::{Summary, SummaryRow};

use crate::error::{Error, Result};

/// Process exit code for an error: 2 for invalid input or configuration,
/// 3 for numerical divergence, 4 for I/O failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergence(_) => 3,
        Error::Io { .. } => 4,
        Error::Schema { .. }
        | Error::DuplicateRecord { .. }
        | Error::EmptyPanel(_)
        | Error::InsufficientData(_)
        | Error::OracleSize { .. }
        | Error::Config(_)
        | Error::InvalidInput(_)
        | Error::Artifact { .. } => 2,
    }
}

/// Runs `f` on a dedicated pool with `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}
