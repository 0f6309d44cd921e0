use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::{Overrides, RunConfig, Stage};
use super::{exit_code, run_stage, with_workers};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "market-ising", version, about = "Static and kinetic Ising models for daily stock movements")]
pub struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides run.out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads (overrides run.workers; 0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Debug-level logging
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Load prices, binarize and write the spin panel.
    Ingest,
    /// Fit the static pairwise model to the panel.
    FitStatic,
    /// Fit the kinetic model to the panel.
    FitKinetic,
    /// Compute diagnostics and the summary table.
    Analyze,
    /// Render SVG charts from the analysis CSVs.
    Charts,
    /// Check the configuration without running anything.
    ValidateConfig,
    /// Run every stage listed in run.stages.
    Run,
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            out: self.out.clone(),
            seed: self.seed,
            workers: self.workers,
        });
        Ok(cfg)
    }

    /// Runs the command and returns the process exit code.
    pub fn run(&self) -> i32 {
        match self.execute() {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        }
    }

    fn execute(&self) -> Result<()> {
        let cfg = self.load_config()?;
        if self.command == Command::ValidateConfig {
            println!("{}", super::cmd_validate_config(&cfg)?);
            return Ok(());
        }
        let reports = with_workers(cfg.run.workers, || match self.command {
            Command::Run => super::run_pipeline(&cfg),
            single => {
                let stage = match single {
                    Command::Ingest => Stage::Ingest,
                    Command::FitStatic => Stage::FitStatic,
                    Command::FitKinetic => Stage::FitKinetic,
                    Command::Analyze => Stage::Analyze,
                    Command::Charts => Stage::Charts,
                    Command::ValidateConfig | Command::Run => unreachable!("handled above"),
                };
                run_stage(&cfg, stage).map(|r| vec![r])
            }
        })??;
        for r in reports {
            println!("{}: {} files", r.stage.name(), r.files.len());
            for f in &r.files {
                log::info!("  {}", f.display());
            }
        }
        Ok(())
    }
}

impl From<rayon::ThreadPoolBuildError> for Error {
    fn from(e: rayon::ThreadPoolBuildError) -> Self {
        Error::Config(format!("worker pool: {e}"))
    }
}
