use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{HatBasis, KineticFitConfig, KineticIsingModel, PenaltyConfig, StockFitTrace};
use crate::error::{Error, Result};

pub const KINETIC_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticFitMeta {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub optimizer: String,
    pub stocks_converged: usize,
    pub worst_max_abs_gradient: f64,
}

impl KineticFitMeta {
    pub fn new(config: &KineticFitConfig, traces: &[StockFitTrace]) -> Self {
        KineticFitMeta {
            max_iterations: config.max_iterations,
            tolerance: config.tolerance,
            optimizer: "per-stock gradient ascent, Barzilai-Borwein step with Armijo backtracking".into(),
            stocks_converged: traces.iter().filter(|t| t.converged).count(),
            worst_max_abs_gradient: traces.iter().map(|t| t.max_abs_gradient).fold(0.0, f64::max),
        }
    }
}

/// On-disk kinetic model; `gamma` (N×M) and `j` (N×N, zero diagonal) are
/// flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticModelDocument {
    pub schema_version: u32,
    pub n: usize,
    pub m_basis: usize,
    pub t_len: usize,
    pub tickers: Vec<String>,
    pub gamma: Vec<f64>,
    pub a: Vec<f64>,
    pub j: Vec<f64>,
    pub penalties: PenaltyConfig,
    pub fit_meta: Option<KineticFitMeta>,
}

impl KineticModelDocument {
    pub fn from_model(model: &KineticIsingModel, penalties: PenaltyConfig, fit_meta: Option<KineticFitMeta>) -> Self {
        KineticModelDocument {
            schema_version: KINETIC_SCHEMA_VERSION,
            n: model.n(),
            m_basis: model.basis().n_basis(),
            t_len: model.basis().t_len(),
            tickers: model.tickers().to_vec(),
            gamma: model.gamma().iter().copied().collect(),
            a: model.a().to_vec(),
            j: model.j().iter().copied().collect(),
            penalties,
            fit_meta,
        }
    }

    pub fn to_model(&self) -> Result<KineticIsingModel> {
        let (n, m) = (self.n, self.m_basis);
        let bad = |what: &str| Error::InvalidInput(format!("kinetic model document: {what} does not match n = {n}, m_basis = {m}"));
        let gamma = Array2::from_shape_vec((n, m), self.gamma.clone()).map_err(|_| bad("gamma"))?;
        let j = Array2::from_shape_vec((n, n), self.j.clone()).map_err(|_| bad("j"))?;
        if self.a.len() != n {
            return Err(bad("a"));
        }
        let basis = HatBasis::new(m, self.t_len)?;
        KineticIsingModel::new(gamma, Array1::from(self.a.clone()), j, basis)?.with_tickers(self.tickers.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kinetic model document serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: Self = serde_json::from_str(&text).map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if doc.schema_version != KINETIC_SCHEMA_VERSION {
            return Err(Error::Artifact {
                path: path.to_path_buf(),
                message: format!("unsupported schema_version {}", doc.schema_version),
            });
        }
        Ok(doc)
    }
}
