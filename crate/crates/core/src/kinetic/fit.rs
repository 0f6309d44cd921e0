//! Per-stock penalized conditional maximum likelihood.
//!
//! The likelihood factorizes over target stocks, and every stock shares the
//! same regressors: the basis values `phi(t)` and the previous state `s(t)`.
//! Stock `i` therefore solves a concave logistic-type problem in
//! `w_i = [gamma_i·, a_i, J_i·]`, packed as `[gamma_i (M), b_i (N)]` with
//! `b_ii = a_i` and `b_ik = J_ik` for `k ≠ i`.

use ndarray::{s, Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::{smoothness_gradient, smoothness_penalty, PenaltyConfig};
use super::{log_2cosh, HatBasis, KineticIsingModel};
use crate::error::{Error, Result};
use crate::panel::SpinPanel;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KineticFitConfig {
    pub n_basis: usize,
    pub penalties: PenaltyConfig,
    pub max_iterations: usize,
    /// Converged once every penalized-gradient entry is at most this in
    /// absolute value.
    pub tolerance: f64,
}

impl Default for KineticFitConfig {
    fn default() -> Self {
        KineticFitConfig {
            n_basis: 30,
            penalties: PenaltyConfig::default(),
            max_iterations: 20_000,
            tolerance: 1e-6,
        }
    }
}

impl KineticFitConfig {
    pub fn validate_for(&self, panel_len: usize) -> Result<()> {
        self.penalties.validate()?;
        if self.n_basis < 2 {
            return Err(Error::Config("kinetic fit: n_basis must be at least 2".into()));
        }
        if panel_len < self.n_basis + 2 {
            return Err(Error::Config(format!(
                "kinetic fit with {} basis functions needs at least {} days, panel has {panel_len}",
                self.n_basis,
                self.n_basis + 2
            )));
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(Error::Config("kinetic fit: max_iterations and tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockFitTrace {
    pub ticker: String,
    pub iterations: usize,
    pub max_abs_gradient: f64,
    pub objective: f64,
    pub converged: bool,
}

impl StockFitTrace {
    pub fn to_csv(traces: &[StockFitTrace]) -> String {
        let mut out = String::from("ticker,iterations,max_abs_gradient,objective,converged\n");
        for t in traces {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t.ticker, t.iterations, t.max_abs_gradient, t.objective, t.converged
            ));
        }
        out
    }
}

/// One stock's fitted block.
#[derive(Debug, Clone, PartialEq)]
pub struct StockFit {
    pub gamma: Array1<f64>,
    pub a: f64,
    /// Row `i` of J, with a zero in position `i`.
    pub j_row: Array1<f64>,
    pub trace: StockFitTrace,
}

/// Shared regressors `[phi(t) | s(t)]` and responses `s(t+1)`.
pub struct KineticDesign {
    x: Array2<f64>,
    next: Array2<f64>,
    basis: HatBasis,
    tickers: Vec<String>,
}

impl KineticDesign {
    pub fn new(panel: &SpinPanel, n_basis: usize) -> Result<Self> {
        let basis = HatBasis::new(n_basis, panel.n_days())?;
        let spins = panel.to_f64();
        let t = panel.n_days();
        let n = panel.n_stocks();
        let mut x = Array2::zeros((t - 1, n_basis + n));
        x.slice_mut(s![.., ..n_basis]).assign(&basis.matrix());
        x.slice_mut(s![.., n_basis..]).assign(&spins.slice(s![..t - 1, ..]));
        Ok(KineticDesign {
            x,
            next: spins.slice(s![1.., ..]).to_owned(),
            basis,
            tickers: panel.tickers().to_vec(),
        })
    }

    fn n_basis(&self) -> usize {
        self.basis.n_basis()
    }

    fn n_stocks(&self) -> usize {
        self.next.ncols()
    }

    fn dim(&self) -> usize {
        self.x.ncols()
    }
}

struct StockProblem<'a> {
    design: &'a KineticDesign,
    target: usize,
    pen: PenaltyConfig,
}

impl StockProblem<'_> {
    fn penalty(&self, w: &Array1<f64>) -> f64 {
        let m = self.design.n_basis();
        let gamma = w.slice(s![..m]);
        let mut p = self.pen.l2_gamma * gamma.dot(&gamma) + self.pen.smooth_gamma * smoothness_penalty(gamma);
        for (k, b) in w.slice(s![m..]).iter().enumerate() {
            let weight = if k == self.target { self.pen.l2_a } else { self.pen.l2_j };
            p += weight * b * b;
        }
        p
    }

    fn objective(&self, w: &Array1<f64>) -> f64 {
        let theta = self.design.x.dot(w);
        let y = self.design.next.column(self.target);
        let ll: f64 = theta.iter().zip(y).map(|(th, s)| s * th - log_2cosh(*th)).sum();
        ll / theta.len() as f64 - self.penalty(w)
    }

    fn gradient(&self, w: &Array1<f64>) -> Array1<f64> {
        let m = self.design.n_basis();
        let theta = self.design.x.dot(w);
        let resid = &self.design.next.column(self.target) - &theta.mapv(f64::tanh);
        let mut g = self.design.x.t().dot(&resid) / theta.len() as f64;
        let gamma = w.slice(s![..m]);
        g.slice_mut(s![..m]).scaled_add(-2.0 * self.pen.l2_gamma, &gamma);
        g.slice_mut(s![..m]).scaled_add(-self.pen.smooth_gamma, &smoothness_gradient(gamma));
        for k in 0..self.design.n_stocks() {
            let weight = if k == self.target { self.pen.l2_a } else { self.pen.l2_j };
            g[m + k] -= 2.0 * weight * w[m + k];
        }
        // J_ii does not exist; its slot carries a_i, so nothing to mask here
        g
    }

    /// Gradient ascent with Barzilai-Borwein trial steps and Armijo
    /// backtracking.
    fn solve(&self, init: Array1<f64>, cfg: &KineticFitConfig) -> Result<(Array1<f64>, StockFitTrace)> {
        let ticker = self.design.tickers[self.target].clone();
        let mut w = init;
        let mut f = self.objective(&w);
        let mut g = self.gradient(&w);
        let mut step = 1.0;
        let mut previous: Option<(Array1<f64>, Array1<f64>)> = None;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < cfg.max_iterations {
            let g_max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if g_max <= cfg.tolerance {
                converged = true;
                break;
            }
            if let Some((w_prev, g_prev)) = &previous {
                let ds = &w - w_prev;
                let dg = &g - g_prev;
                let curvature = -ds.dot(&dg);
                if curvature > 0.0 {
                    step = (ds.dot(&ds) / curvature).clamp(1e-10, 1e10);
                }
            }
            let gg = g.dot(&g);
            // allow rounding-level slack so steps near the optimum are not rejected
            let slack = 1e-13 * (1.0 + f.abs());
            let (w_new, f_new) = loop {
                let candidate = &w + &(&g * step);
                let f_candidate = self.objective(&candidate);
                if f_candidate.is_finite() && f_candidate >= f + ARMIJO * step * gg - slack {
                    break (candidate, f_candidate);
                }
                step *= 0.5;
                if step < MIN_STEP {
                    return Err(Error::Divergence(format!(
                        "line search failed for stock {ticker} at iteration {iterations}"
                    )));
                }
            };
            let g_new = self.gradient(&w_new);
            previous = Some((std::mem::replace(&mut w, w_new), std::mem::replace(&mut g, g_new)));
            f = f_new;
            iterations += 1;
            if !f.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence(format!("non-finite parameters for stock {ticker}")));
            }
        }
        let max_abs_gradient = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        converged |= max_abs_gradient <= cfg.tolerance;
        Ok((
            w,
            StockFitTrace {
                ticker,
                iterations,
                max_abs_gradient,
                objective: f,
                converged,
            },
        ))
    }
}

fn unpack(design: &KineticDesign, target: usize, w: &Array1<f64>, trace: StockFitTrace) -> StockFit {
    let m = design.n_basis();
    let mut j_row = w.slice(s![m..]).to_owned();
    let a = j_row[target];
    j_row[target] = 0.0;
    StockFit {
        gamma: w.slice(s![..m]).to_owned(),
        a,
        j_row,
        trace,
    }
}

/// Fits stock `target` alone, starting from `init` (packed
/// `[gamma, b]`, length `M + N`) or from zeros.
pub fn fit_stock(
    design: &KineticDesign,
    target: usize,
    cfg: &KineticFitConfig,
    init: Option<Array1<f64>>,
) -> Result<StockFit> {
    if target >= design.n_stocks() {
        return Err(Error::InvalidInput(format!("stock index {target} out of range")));
    }
    let init = init.unwrap_or_else(|| Array1::zeros(design.dim()));
    if init.len() != design.dim() {
        return Err(Error::InvalidInput(format!(
            "initial parameter vector must have length {}",
            design.dim()
        )));
    }
    let problem = StockProblem {
        design,
        target,
        pen: cfg.penalties,
    };
    let (w, trace) = problem.solve(init, cfg)?;
    Ok(unpack(design, target, &w, trace))
}

/// Fits every stock independently (in parallel on the current rayon pool)
/// and assembles the model. Results do not depend on the worker count.
pub fn fit_kinetic(panel: &SpinPanel, cfg: &KineticFitConfig) -> Result<(KineticIsingModel, Vec<StockFitTrace>)> {
    cfg.validate_for(panel.n_days())?;
    let design = KineticDesign::new(panel, cfg.n_basis)?;
    let n = panel.n_stocks();
    let fits: Vec<StockFit> = (0..n)
        .into_par_iter()
        .map(|i| fit_stock(&design, i, cfg, None))
        .collect::<Result<_>>()?;
    let mut model = KineticIsingModel::zeros(n, design.basis.clone()).with_tickers(panel.tickers().to_vec())?;
    let mut traces = Vec::with_capacity(n);
    for (i, fit) in fits.into_iter().enumerate() {
        model.gamma.row_mut(i).assign(&fit.gamma);
        model.a[i] = fit.a;
        model.j.row_mut(i).assign(&fit.j_row);
        if !fit.trace.converged {
            log::warn!(
                "stock {} stopped after {} iterations (max |gradient| {:.3e})",
                fit.trace.ticker,
                fit.trace.iterations,
                fit.trace.max_abs_gradient
            );
        }
        traces.push(fit.trace);
    }
    Ok((model, traces))
}
