use std::collections::VecDeque;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{exact_moments, model_moments_mc, GibbsConfig, StaticIsingModel, ORACLE_LIMIT};
use crate::error::{Error, Result};
use crate::panel::MomentSet;
use crate::rng;

/// Window of the moving average applied to Monte Carlo residuals.
const RESIDUAL_WINDOW: usize = 5;
const ATANH_CLAMP: f64 = 0.999_999;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    #[default]
    Constant,
    /// `step_size / sqrt(iteration)`.
    Decay,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zeros,
    /// `h = atanh(m1)`, `J = 0`: the optimum of the independent-spin model.
    #[default]
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticFitConfig {
    pub max_iterations: usize,
    pub step_size: f64,
    pub step_schedule: StepSchedule,
    /// Stop once the max-abs moment residual is at or below this value.
    pub tolerance: f64,
    pub gibbs: GibbsConfig,
    pub init: Init,
    /// Use exact enumeration for model moments (requires `N <= 20`).
    pub exact: bool,
}

impl Default for StaticFitConfig {
    fn default() -> Self {
        StaticFitConfig {
            max_iterations: 2_000,
            step_size: 0.1,
            step_schedule: StepSchedule::Constant,
            tolerance: 0.01,
            gibbs: GibbsConfig::default(),
            init: Init::MeanField,
            exact: false,
        }
    }
}

impl StaticFitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("static fit: max_iterations must be positive".into()));
        }
        if !(self.step_size > 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::Config("static fit: step_size and tolerance must be positive".into()));
        }
        self.gibbs.validate()
    }

    fn step_at(&self, iteration: usize) -> f64 {
        match self.step_schedule {
            StepSchedule::Constant => self.step_size,
            StepSchedule::Decay => self.step_size / (iteration as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTraceRow {
    pub iteration: usize,
    pub max_abs_residual: f64,
    pub rms_residual: f64,
    pub step_size: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub rows: Vec<FitTraceRow>,
    pub converged: bool,
}

impl FitTrace {
    pub fn final_row(&self) -> Option<&FitTraceRow> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,max_abs_residual,rms_residual,step_size\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.max_abs_residual, r.rms_residual, r.step_size
            ));
        }
        out
    }
}

/// Log-likelihood gradient: target minus model moments. `grad_j` is
/// symmetric with a zero diagonal.
pub fn static_gradient(target: &MomentSet, model: &MomentSet) -> (Array1<f64>, Array2<f64>) {
    let grad_h = &target.m1 - &model.m1;
    let mut grad_j = &target.m2 - &model.m2;
    let n = grad_j.nrows();
    for a in 0..n {
        grad_j[(a, a)] = 0.0;
        for b in a + 1..n {
            grad_j[(b, a)] = grad_j[(a, b)];
        }
    }
    (grad_h, grad_j)
}

fn initial_model(target: &MomentSet, init: Init) -> StaticIsingModel {
    let mut model = StaticIsingModel::zeros(target.n());
    if init == Init::MeanField {
        model.h = target.m1.mapv(|m| m.clamp(-ATANH_CLAMP, ATANH_CLAMP).atanh());
    }
    model
}

/// Moment-matching gradient ascent. Model moments come from exact
/// enumeration when `cfg.exact` is set, otherwise from a fresh Gibbs run
/// per iteration whose seed is derived from `(gibbs.seed, iteration)`.
pub fn fit_static(target: &MomentSet, cfg: &StaticFitConfig) -> Result<(StaticIsingModel, FitTrace)> {
    cfg.validate()?;
    if target.n() < 2 {
        return Err(Error::InvalidInput("static fit needs at least two stocks".into()));
    }
    if cfg.exact && target.n() > ORACLE_LIMIT {
        return Err(Error::OracleSize {
            n: target.n(),
            limit: ORACLE_LIMIT,
        });
    }
    let mut model = initial_model(target, cfg.init);
    let mut trace = FitTrace::default();
    let mut recent = VecDeque::with_capacity(RESIDUAL_WINDOW);

    for iteration in 1..=cfg.max_iterations {
        let moments = if cfg.exact {
            exact_moments(&model)?
        } else {
            let gibbs = GibbsConfig {
                seed: rng::derive_seed(cfg.gibbs.seed, iteration as u64),
                ..cfg.gibbs.clone()
            };
            model_moments_mc(&model, &gibbs)?
        };
        if moments.m1.iter().chain(moments.m2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!(
                "model moments became non-finite at iteration {iteration}; try a smaller step_size"
            )));
        }
        let step = cfg.step_at(iteration);
        let max_abs = target.max_abs_residual(&moments);
        trace.rows.push(FitTraceRow {
            iteration,
            max_abs_residual: max_abs,
            rms_residual: target.rms_residual(&moments),
            step_size: step,
        });

        let stop_metric = if cfg.exact {
            max_abs
        } else {
            if recent.len() == RESIDUAL_WINDOW {
                recent.pop_front();
            }
            recent.push_back(max_abs);
            if recent.len() < RESIDUAL_WINDOW {
                f64::INFINITY
            } else {
                recent.iter().sum::<f64>() / RESIDUAL_WINDOW as f64
            }
        };
        if stop_metric <= cfg.tolerance {
            trace.converged = true;
            break;
        }

        let (grad_h, grad_j) = static_gradient(target, &moments);
        model.ascend(step, &grad_h, &grad_j);
        if !model.is_finite() {
            return Err(Error::Divergence(format!(
                "static parameters became non-finite at iteration {iteration}; try a smaller step_size"
            )));
        }
    }
    if !trace.converged {
        log::warn!(
            "static fit stopped after {} iterations without reaching tolerance {}",
            cfg.max_iterations,
            cfg.tolerance
        );
    }
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn exact_cfg() -> StaticFitConfig {
        StaticFitConfig {
            max_iterations: 20_000,
            step_size: 0.2,
            tolerance: 1e-9,
            exact: true,
            ..StaticFitConfig::default()
        }
    }

    #[test]
    fn gradient_is_moment_difference() {
        let target = MomentSet::new(array![0.5, 0.1], array![[1.0, 0.4], [0.4, 1.0]]).unwrap();
        let model = MomentSet::new(array![0.2, 0.3], array![[1.0, -0.1], [-0.1, 1.0]]).unwrap();
        let (gh, gj) = static_gradient(&target, &model);
        assert_abs_diff_eq!(gh[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(gh[1], -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(gj[(0, 1)], 0.5, epsilon = 1e-15);
        assert_eq!(gj[(0, 1)], gj[(1, 0)]);
        assert_eq!(gj[(0, 0)], 0.0);
        let (zh, zj) = static_gradient(&target, &target);
        assert!(zh.iter().chain(zj.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn independent_target_gives_atanh_fields() {
        let m1 = array![0.3, -0.5, 0.1];
        let m2 = Array2::from_shape_fn((3, 3), |(a, b)| if a == b { 1.0 } else { m1[a] * m1[b] });
        let target = MomentSet::new(m1.clone(), m2).unwrap();
        let (model, trace) = fit_static(&target, &exact_cfg()).unwrap();
        assert!(trace.converged);
        for a in 0..3 {
            assert_abs_diff_eq!(model.h()[a], m1[a].atanh(), epsilon = 1e-8);
        }
        assert!(model.j().iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn trace_has_one_row_per_iteration() {
        let target = MomentSet::new(array![0.2, 0.1], array![[1.0, 0.3], [0.3, 1.0]]).unwrap();
        let cfg = StaticFitConfig {
            max_iterations: 7,
            tolerance: 1e-12,
            ..exact_cfg()
        };
        let (_, trace) = fit_static(&target, &cfg).unwrap();
        assert_eq!(trace.rows.len(), 7);
        assert!(!trace.converged);
        assert_eq!(trace.to_csv().lines().count(), 8);
    }

    #[test]
    fn divergence_is_reported() {
        let target = MomentSet::new(array![0.2, 0.1], array![[1.0, 0.3], [0.3, 1.0]]).unwrap();
        let cfg = StaticFitConfig {
            step_size: 1e308,
            init: Init::Zeros,
            ..exact_cfg()
        };
        assert!(matches!(fit_static(&target, &cfg), Err(Error::Divergence(_))));
    }

    #[test]
    fn monte_carlo_mode_reaches_noise_floor() {
        let truth = StaticIsingModel::new(array![0.2, -0.1, 0.3], array![[0.0, 0.3, 0.0], [0.3, 0.0, -0.2], [0.0, -0.2, 0.0]]).unwrap();
        let target = exact_moments(&truth).unwrap();
        let cfg = StaticFitConfig {
            max_iterations: 400,
            step_size: 0.3,
            tolerance: 0.01,
            gibbs: GibbsConfig {
                n_chains: 4,
                n_samples: 5_000,
                burn_in_sweeps: 50,
                seed: 17,
                ..GibbsConfig::default()
            },
            ..StaticFitConfig::default()
        };
        let (model, trace) = fit_static(&target, &cfg).unwrap();
        assert!(trace.converged);
        assert!(exact_moments(&model).unwrap().max_abs_residual(&target) < 0.03);
    }
}
