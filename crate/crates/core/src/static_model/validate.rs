use serde::{Deserialize, Serialize};

use super::{exact_moments, model_moments_mc, GibbsConfig, StaticIsingModel};
use crate::error::{Error, Result};
use crate::panel::{empirical_moments, MomentSet, SpinPanel};

/// How model moments are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentEstimator {
    Exact,
    Gibbs(GibbsConfig),
}

impl MomentEstimator {
    pub fn estimate(&self, model: &StaticIsingModel) -> Result<MomentSet> {
        match self {
            MomentEstimator::Exact => exact_moments(model),
            MomentEstimator::Gibbs(cfg) => model_moments_mc(model, cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Mean,
    Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub kind: MomentKind,
    pub i: usize,
    /// Equal to `i` for mean rows.
    pub j: usize,
    pub empirical: f64,
    pub model: f64,
    /// Connected correlation coefficient implied by the moments (pair rows).
    pub empirical_corr: f64,
    pub model_corr: f64,
}

/// Paired empirical and model moments: one row per mean, one per
/// off-diagonal pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub max_abs_residual: f64,
    pub rms_residual: f64,
}

impl ValidationReport {
    pub fn to_csv(&self, tickers: &[String]) -> String {
        let mut out = String::from("kind,ticker_i,ticker_j,empirical,model,empirical_corr,model_corr\n");
        for r in &self.rows {
            let kind = match r.kind {
                MomentKind::Mean => "mean",
                MomentKind::Pair => "pair",
            };
            out.push_str(&format!(
                "{kind},{},{},{},{},{},{}\n",
                tickers[r.i], tickers[r.j], r.empirical, r.model, r.empirical_corr, r.model_corr
            ));
        }
        out
    }
}

pub fn validate_static(
    model: &StaticIsingModel,
    panel: &SpinPanel,
    estimator: &MomentEstimator,
) -> Result<ValidationReport> {
    if model.n() != panel.n_stocks() {
        return Err(Error::InvalidInput(format!(
            "model has {} stocks, panel has {}",
            model.n(),
            panel.n_stocks()
        )));
    }
    let emp = empirical_moments(panel);
    let fit = estimator.estimate(model)?;
    let n = model.n();
    let mut rows = Vec::with_capacity(n + n * (n - 1) / 2);
    for i in 0..n {
        rows.push(ValidationRow {
            kind: MomentKind::Mean,
            i,
            j: i,
            empirical: emp.m1[i],
            model: fit.m1[i],
            empirical_corr: f64::NAN,
            model_corr: f64::NAN,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            rows.push(ValidationRow {
                kind: MomentKind::Pair,
                i,
                j,
                empirical: emp.m2[(i, j)],
                model: fit.m2[(i, j)],
                empirical_corr: emp.correlation(i, j),
                model_corr: fit.correlation(i, j),
            });
        }
    }
    Ok(ValidationReport {
        rows,
        max_abs_residual: emp.max_abs_residual(&fit),
        rms_residual: emp.rms_residual(&fit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::static_model::{fit_static, StaticFitConfig};
    use ndarray::{array, Array2};

    fn correlated_panel() -> SpinPanel {
        let rows: Vec<i8> = (0..40)
            .flat_map(|t| {
                let s = if t % 3 == 0 { -1 } else { 1 };
                [s, s, if t % 5 == 0 { -s } else { s }, -1]
            })
            .collect();
        SpinPanel::synthetic(Array2::from_shape_vec((40, 4), rows).unwrap()).unwrap()
    }

    #[test]
    fn row_count_is_means_plus_pairs() {
        let panel = correlated_panel();
        let r = validate_static(&StaticIsingModel::zeros(4), &panel, &MomentEstimator::Exact).unwrap();
        assert_eq!(r.rows.len(), 4 + 4 * 3 / 2);
    }

    #[test]
    fn zero_model_is_a_poor_fit_and_fitted_model_is_good() {
        // every configuration appears, so the moments are interior and the fit exists
        let panel = SpinPanel::synthetic(array![
            [1, 1, 1],
            [1, 1, -1],
            [1, -1, 1],
            [1, -1, -1],
            [-1, 1, 1],
            [-1, 1, -1],
            [-1, -1, 1],
            [-1, -1, -1],
            [1, 1, 1],
            [1, 1, -1],
            [1, 1, 1],
            [-1, -1, 1]
        ])
        .unwrap();
        let zero = validate_static(&StaticIsingModel::zeros(3), &panel, &MomentEstimator::Exact).unwrap();
        assert!(zero.max_abs_residual > 0.3);
        let cfg = StaticFitConfig {
            exact: true,
            tolerance: 1e-6,
            step_size: 0.2,
            max_iterations: 50_000,
            ..StaticFitConfig::default()
        };
        let (model, _) = fit_static(&empirical_moments(&panel), &cfg).unwrap();
        let fitted = validate_static(&model, &panel, &MomentEstimator::Exact).unwrap();
        assert!(fitted.max_abs_residual <= 1e-6);
    }
}
