//! Declarative run configuration (TOML).
//!
//! Relative paths are resolved against the directory holding the config
//! file. Command-line flags override the corresponding keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetic::KineticFitConfig;
use crate::panel::{CompletenessRule, DateWindow};
use crate::static_model::StaticFitConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Ingest,
    FitStatic,
    FitKinetic,
    Analyze,
    Charts,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Ingest, Stage::FitStatic, Stage::FitKinetic, Stage::Analyze, Stage::Charts];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::FitStatic => "fit-static",
            Stage::FitKinetic => "fit-kinetic",
            Stage::Analyze => "analyze",
            Stage::Charts => "charts",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceFormat {
    /// One `date,ticker,open,close` record per line.
    #[default]
    Long,
    /// Separate `date,<ticker>...` files for opens and closes.
    Wide,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub format: PriceFormat,
    /// Long-format price file.
    pub prices: Option<PathBuf>,
    /// Wide-format open and close files.
    pub open: Option<PathBuf>,
    pub close: Option<PathBuf>,
    /// Optional `ticker,sector` table.
    pub sectors: Option<PathBuf>,
    pub completeness: CompletenessRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out: PathBuf,
    /// Master seed. The static fit uses it directly; validation sampling and
    /// graph benchmarks use seeds derived from it.
    pub seed: u64,
    /// Worker threads; 0 lets the thread pool decide.
    pub workers: usize,
    /// Stages run in order by the pipeline driver.
    pub stages: Vec<Stage>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out: PathBuf::from("out"),
            seed: 0,
            workers: 0,
            stages: Stage::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub filter_fraction: f64,
    pub benchmark_realizations: usize,
    pub watts_strogatz_beta: f64,
    pub watts_strogatz_realizations: usize,
    pub backbone_fraction: f64,
    pub prominence_fraction: f64,
    pub sector_edge_percentile: f64,
    pub histogram_bins: usize,
    pub breadth_bins: usize,
    pub calibration_bins: usize,
    /// Length of the ranked lists in the summary.
    pub top_k: usize,
    /// Use exact enumeration for static validation moments when `N` allows.
    pub exact_validation: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            filter_fraction: 0.1,
            benchmark_realizations: 300,
            watts_strogatz_beta: 0.53,
            watts_strogatz_realizations: 300,
            backbone_fraction: 0.1,
            prominence_fraction: 0.02,
            sector_edge_percentile: 30.0,
            histogram_bins: 50,
            breadth_bins: 41,
            calibration_bins: 100,
            top_k: 5,
            exact_validation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub input: InputConfig,
    pub static_fit: StaticFitConfig,
    pub kinetic_fit: KineticFitConfig,
    pub analysis: AnalysisConfig,
    pub windows: Vec<DateWindow>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run: RunSection::default(),
            input: InputConfig::default(),
            static_fit: StaticFitConfig::default(),
            kinetic_fit: KineticFitConfig::default(),
            analysis: AnalysisConfig::default(),
            windows: DateWindow::defaults(),
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.run.out);
        for p in [&mut self.input.prices, &mut self.input.open, &mut self.input.close, &mut self.input.sectors]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.run.out = out.clone();
        }
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(w) = o.workers {
            self.run.workers = w;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Checks numeric ranges and windows. Input paths are only checked for
    /// the stages that read them, see [`RunConfig::validate_inputs`].
    pub fn validate(&self) -> Result<()> {
        self.static_fit.validate()?;
        self.kinetic_fit.penalties.validate()?;
        if self.kinetic_fit.n_basis < 2 || self.kinetic_fit.max_iterations == 0 || !(self.kinetic_fit.tolerance > 0.0) {
            return Err(Error::Config(
                "kinetic_fit: n_basis must be at least 2 and max_iterations, tolerance positive".into(),
            ));
        }
        let a = &self.analysis;
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(a.filter_fraction) || !in_unit(a.prominence_fraction) {
            return Err(Error::Config("analysis: filter_fraction and prominence_fraction must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&a.backbone_fraction) || !(0.0..=1.0).contains(&a.watts_strogatz_beta) {
            return Err(Error::Config("analysis: backbone_fraction and watts_strogatz_beta must be in [0, 1]".into()));
        }
        if !(0.0..=100.0).contains(&a.sector_edge_percentile) {
            return Err(Error::Config("analysis: sector_edge_percentile must be in [0, 100]".into()));
        }
        if a.benchmark_realizations == 0 || a.watts_strogatz_realizations == 0 {
            return Err(Error::Config("analysis: benchmark realization counts must be positive".into()));
        }
        if a.histogram_bins == 0 || a.breadth_bins == 0 || a.calibration_bins == 0 {
            return Err(Error::Config("analysis: bin counts must be positive".into()));
        }
        for w in &self.windows {
            if w.start > w.end {
                return Err(Error::Config(format!("window {:?} ends before it starts", w.name)));
            }
            if w.name.trim().is_empty() || w.name.contains(',') {
                return Err(Error::Config("window names must be non-empty and comma-free".into()));
            }
        }
        Ok(())
    }

    /// Checks that the price (and sector) files exist.
    pub fn validate_inputs(&self) -> Result<()> {
        let need = |p: &Option<PathBuf>, key: &str| -> Result<()> {
            match p {
                None => Err(Error::Config(format!("input.{key} is required"))),
                Some(p) if !p.is_file() => Err(Error::Config(format!("input.{key}: {} does not exist", p.display()))),
                Some(_) => Ok(()),
            }
        };
        match self.input.format {
            PriceFormat::Long => need(&self.input.prices, "prices")?,
            PriceFormat::Wide => {
                need(&self.input.open, "open")?;
                need(&self.input.close, "close")?;
            }
        }
        if self.input.sectors.is_some() {
            need(&self.input.sectors, "sectors")?;
        }
        Ok(())
    }
}
