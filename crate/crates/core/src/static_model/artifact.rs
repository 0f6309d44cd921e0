use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{FitTrace, StaticFitConfig, StaticIsingModel};
use crate::error::{Error, Result};

pub const STATIC_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticFitMeta {
    pub config: StaticFitConfig,
    pub seed: u64,
    pub rng: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_max_abs_residual: f64,
    pub final_rms_residual: f64,
    /// Sampler and optimizer settings are engineering defaults, not values
    /// taken from any reference fit.
    pub note: String,
}

impl StaticFitMeta {
    pub fn new(config: &StaticFitConfig, trace: &FitTrace) -> Self {
        let last = trace.final_row();
        StaticFitMeta {
            config: config.clone(),
            seed: config.gibbs.seed,
            rng: crate::rng::RNG_ALGORITHM.to_string(),
            iterations: trace.rows.len(),
            converged: trace.converged,
            final_max_abs_residual: last.map_or(f64::NAN, |r| r.max_abs_residual),
            final_rms_residual: last.map_or(f64::NAN, |r| r.rms_residual),
            note: "chain counts, burn-in, step size and tolerance are engineering defaults".into(),
        }
    }
}

/// On-disk static model. Couplings are stored as the strict upper triangle
/// in row-major order, so symmetry holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticModelDocument {
    pub schema_version: u32,
    pub n: usize,
    pub tickers: Vec<String>,
    pub h: Vec<f64>,
    pub j: Vec<f64>,
    pub fit_meta: Option<StaticFitMeta>,
}

impl StaticModelDocument {
    pub fn from_model(model: &StaticIsingModel, fit_meta: Option<StaticFitMeta>) -> Self {
        let n = model.n();
        let mut j = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                j.push(model.j()[(a, b)]);
            }
        }
        StaticModelDocument {
            schema_version: STATIC_SCHEMA_VERSION,
            n,
            tickers: model.tickers().to_vec(),
            h: model.h().to_vec(),
            j,
            fit_meta,
        }
    }

    pub fn to_model(&self) -> Result<StaticIsingModel> {
        let n = self.n;
        if self.h.len() != n || self.j.len() != n * n.saturating_sub(1) / 2 || self.tickers.len() != n {
            return Err(Error::InvalidInput(format!(
                "static model document sizes do not match n = {n}"
            )));
        }
        let mut j = Array2::zeros((n, n));
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                j[(a, b)] = self.j[k];
                j[(b, a)] = self.j[k];
                k += 1;
            }
        }
        StaticIsingModel::new(Array1::from(self.h.clone()), j)?.with_tickers(self.tickers.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("static model document serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: Self = serde_json::from_str(&text).map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if doc.schema_version != STATIC_SCHEMA_VERSION {
            return Err(Error::Artifact {
                path: path.to_path_buf(),
                message: format!("unsupported schema_version {}", doc.schema_version),
            });
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn document_round_trip() {
        let m = StaticIsingModel::new(
            array![0.1, -0.2, 0.3],
            array![[0.0, 0.5, -0.1], [0.5, 0.0, 0.2], [-0.1, 0.2, 0.0]],
        )
        .unwrap();
        let doc = StaticModelDocument::from_model(&m, None);
        assert_eq!(doc.j, vec![0.5, -0.1, 0.2]);
        let back: StaticModelDocument = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back.to_model().unwrap(), m);
    }
}
