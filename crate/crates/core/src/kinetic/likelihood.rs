//! Conditional log-likelihood of the synchronous dynamics, its ridge and
//! smoothness penalties, and their gradients.

use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{log_2cosh, KineticIsingModel};
use crate::error::{Error, Result};
use crate::panel::SpinPanel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    pub l2_gamma: f64,
    pub l2_a: f64,
    pub l2_j: f64,
    /// Weight on squared second differences of each gamma row.
    pub smooth_gamma: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            l2_gamma: 1e-4,
            l2_a: 1e-4,
            l2_j: 1e-4,
            smooth_gamma: 1e-2,
        }
    }
}

impl PenaltyConfig {
    pub fn none() -> Self {
        PenaltyConfig {
            l2_gamma: 0.0,
            l2_a: 0.0,
            l2_j: 0.0,
            smooth_gamma: 0.0,
        }
    }

    pub fn uniform(weight: f64) -> Self {
        PenaltyConfig {
            l2_gamma: weight,
            l2_a: weight,
            l2_j: weight,
            smooth_gamma: weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.l2_gamma, self.l2_a, self.l2_j, self.smooth_gamma];
        if all.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("penalty weights must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Gradient blocks with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticGradient {
    pub gamma: Array2<f64>,
    pub a: Array1<f64>,
    pub j: Array2<f64>,
}

impl KineticGradient {
    pub fn max_abs(&self) -> f64 {
        self.gamma
            .iter()
            .chain(self.a.iter())
            .chain(self.j.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Aligned `(s(t), s(t+1))` pairs and basis values for every transition.
pub(crate) struct Transitions {
    pub prev: Array2<f64>,
    pub next: Array2<f64>,
    pub phi: Array2<f64>,
}

impl Transitions {
    pub fn new(model: &KineticIsingModel, panel: &SpinPanel) -> Result<Self> {
        check_panel(model, panel)?;
        let x = panel.to_f64();
        let t = panel.n_days();
        Ok(Transitions {
            prev: x.slice(s![..t - 1, ..]).to_owned(),
            next: x.slice(s![1.., ..]).to_owned(),
            phi: model.basis().matrix(),
        })
    }

    pub fn count(&self) -> usize {
        self.prev.nrows()
    }

    /// `theta` for every transition, `(T-1) × N`.
    pub fn fields(&self, model: &KineticIsingModel) -> Array2<f64> {
        let mut b = model.j.clone();
        b.diag_mut().assign(&model.a);
        self.phi.dot(&model.gamma.t()) + self.prev.dot(&b.t())
    }
}

pub(crate) fn check_panel(model: &KineticIsingModel, panel: &SpinPanel) -> Result<()> {
    if panel.n_stocks() != model.n() {
        return Err(Error::InvalidInput(format!(
            "model has {} stocks, panel has {}",
            model.n(),
            panel.n_stocks()
        )));
    }
    if panel.n_days() != model.basis().t_len() {
        return Err(Error::InvalidInput(format!(
            "basis was built for {} days, panel has {}",
            model.basis().t_len(),
            panel.n_days()
        )));
    }
    Ok(())
}

/// `(1/(T-1)) Σ_t Σ_i [s_i(t+1) theta_i(t) - log 2cosh theta_i(t)]`.
pub fn conditional_log_likelihood(model: &KineticIsingModel, panel: &SpinPanel) -> Result<f64> {
    let tr = Transitions::new(model, panel)?;
    let theta = tr.fields(model);
    let total: f64 = theta
        .iter()
        .zip(tr.next.iter())
        .map(|(th, s)| s * th - log_2cosh(*th))
        .sum();
    Ok(total / tr.count() as f64)
}

/// Unpenalized gradients built from the residuals
/// `s_i(t+1) - tanh theta_i(t)`.
pub fn kinetic_gradients(model: &KineticIsingModel, panel: &SpinPanel) -> Result<KineticGradient> {
    let tr = Transitions::new(model, panel)?;
    let resid = &tr.next - &tr.fields(model).mapv(f64::tanh);
    let scale = 1.0 / tr.count() as f64;
    let gamma = resid.t().dot(&tr.phi) * scale;
    let mut j = resid.t().dot(&tr.prev) * scale;
    let a = j.diag().to_owned();
    j.diag_mut().fill(0.0);
    Ok(KineticGradient { gamma, a, j })
}

fn second_differences(row: ndarray::ArrayView1<'_, f64>) -> impl Iterator<Item = f64> + '_ {
    (1..row.len().saturating_sub(1)).map(move |m| row[m - 1] - 2.0 * row[m] + row[m + 1])
}

/// Gradient of `Σ_m (second difference)^2` for one gamma row.
pub(crate) fn smoothness_gradient(row: ndarray::ArrayView1<'_, f64>) -> Array1<f64> {
    let mut g = Array1::zeros(row.len());
    for (k, d) in second_differences(row).enumerate() {
        // difference k involves entries k, k+1, k+2 with weights 1, -2, 1
        g[k] += 2.0 * d;
        g[k + 1] -= 4.0 * d;
        g[k + 2] += 2.0 * d;
    }
    g
}

pub(crate) fn smoothness_penalty(row: ndarray::ArrayView1<'_, f64>) -> f64 {
    second_differences(row).map(|d| d * d).sum()
}

pub fn penalty_value(model: &KineticIsingModel, pen: &PenaltyConfig) -> f64 {
    let sq = |it: &mut dyn Iterator<Item = &f64>| it.map(|v| v * v).sum::<f64>();
    pen.l2_gamma * sq(&mut model.gamma.iter())
        + pen.l2_a * sq(&mut model.a.iter())
        + pen.l2_j * sq(&mut model.j.iter())
        + pen.smooth_gamma * model.gamma.axis_iter(Axis(0)).map(smoothness_penalty).sum::<f64>()
}

pub fn penalized_objective(model: &KineticIsingModel, panel: &SpinPanel, pen: &PenaltyConfig) -> Result<f64> {
    Ok(conditional_log_likelihood(model, panel)? - penalty_value(model, pen))
}

pub fn penalized_gradients(
    model: &KineticIsingModel,
    panel: &SpinPanel,
    pen: &PenaltyConfig,
) -> Result<KineticGradient> {
    let mut g = kinetic_gradients(model, panel)?;
    g.gamma.scaled_add(-2.0 * pen.l2_gamma, &model.gamma);
    for (mut grow, prow) in g.gamma.axis_iter_mut(Axis(0)).zip(model.gamma.axis_iter(Axis(0))) {
        grow.scaled_add(-pen.smooth_gamma, &smoothness_gradient(prow));
    }
    g.a.scaled_add(-2.0 * pen.l2_a, &model.a);
    g.j.scaled_add(-2.0 * pen.l2_j, &model.j);
    Ok(g)
}
