//! Dynamical diagnostics of a fitted kinetic model on its panel.
//!
//! Transition `k` uses day `k` to predict day `k + 1`, and every per-transition
//! series here is labelled with the predicted day's date.

use chrono::NaiveDate;
use ndarray::{Array2, Axis};
use serde::Serialize;

use super::likelihood::{check_panel, Transitions};
use super::KineticIsingModel;
use crate::error::{Error, Result};
use crate::panel::{breadth, DateWindow, Lag1Correlations, SpinPanel};
use crate::stats::{self, Correlation};

/// Market averages of the three parts of the effective field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldDecomposition {
    pub dates: Vec<NaiveDate>,
    pub external: Vec<f64>,
    pub self_memory: Vec<f64>,
    pub interaction: Vec<f64>,
    /// Defined as the sum of the three parts.
    pub total: Vec<f64>,
}

impl FieldDecomposition {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,external,self,interaction,total\n");
        for k in 0..self.dates.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.dates[k], self.external[k], self.self_memory[k], self.interaction[k], self.total[k]
            ));
        }
        out
    }
}

pub fn field_decomposition(model: &KineticIsingModel, panel: &SpinPanel) -> Result<FieldDecomposition> {
    check_panel(model, panel)?;
    let n = model.n() as f64;
    let tr = Transitions::new(model, panel)?;
    let external = tr.phi.dot(&model.gamma.t()).mean_axis(Axis(1)).expect("n >= 1").to_vec();
    let self_memory = (&tr.prev * &model.a).mean_axis(Axis(1)).expect("n >= 1").to_vec();
    let interaction = (tr.prev.dot(&model.j.t()).sum_axis(Axis(1)) / n).to_vec();
    let total = (0..external.len())
        .map(|k| external[k] + self_memory[k] + interaction[k])
        .collect();
    Ok(FieldDecomposition {
        dates: panel.dates()[1..].to_vec(),
        external,
        self_memory,
        interaction,
        total,
    })
}

/// Window means of `h̄`, `θ̄` and empirical breadth over the transitions
/// whose predicted day falls in the window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFieldMeans {
    pub name: String,
    pub transitions: usize,
    pub mean_h_bar: Option<f64>,
    pub mean_theta_bar: Option<f64>,
    pub mean_breadth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketFitReport {
    pub dates: Vec<NaiveDate>,
    /// `(1/N) Σ_i tanh theta_i(t)`.
    pub predicted: Vec<f64>,
    /// Breadth on the predicted day.
    pub empirical: Vec<f64>,
    pub h_bar: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub spearman_predicted: Correlation,
    pub spearman_h_bar: Correlation,
    pub spearman_theta_bar: Correlation,
    pub h_bar_mean: f64,
    pub h_bar_std: f64,
    /// Full sample first, then the requested windows in order.
    pub windows: Vec<WindowFieldMeans>,
}

impl MarketFitReport {
    pub fn series_csv(&self) -> String {
        let mut out = String::from("date,predicted,empirical,h_bar,theta_bar\n");
        for k in 0..self.dates.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.dates[k], self.predicted[k], self.empirical[k], self.h_bar[k], self.theta_bar[k]
            ));
        }
        out
    }

    pub fn windows_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
        let mut out = String::from("window,transitions,mean_h_bar,mean_theta_bar,mean_breadth\n");
        for w in &self.windows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                w.name,
                w.transitions,
                fmt(w.mean_h_bar),
                fmt(w.mean_theta_bar),
                fmt(w.mean_breadth)
            ));
        }
        out
    }
}

pub fn market_fit_report(
    model: &KineticIsingModel,
    panel: &SpinPanel,
    windows: &[DateWindow],
) -> Result<MarketFitReport> {
    check_panel(model, panel)?;
    let tr = Transitions::new(model, panel)?;
    let theta = tr.fields(model);
    let predicted = theta.mapv(f64::tanh).mean_axis(Axis(1)).expect("n >= 1").to_vec();
    let theta_bar = theta.mean_axis(Axis(1)).expect("n >= 1").to_vec();
    let h_bar = tr.phi.dot(&model.gamma.t()).mean_axis(Axis(1)).expect("n >= 1").to_vec();
    let empirical: Vec<f64> = (1..panel.n_days()).map(|t| breadth(panel, t)).collect();
    let dates = panel.dates()[1..].to_vec();

    let window_means = |name: &str, keep: &dyn Fn(NaiveDate) -> bool| {
        let idx: Vec<usize> = (0..dates.len()).filter(|&k| keep(dates[k])).collect();
        let avg = |xs: &[f64]| (!idx.is_empty()).then(|| idx.iter().map(|&k| xs[k]).sum::<f64>() / idx.len() as f64);
        WindowFieldMeans {
            name: name.to_string(),
            transitions: idx.len(),
            mean_h_bar: avg(&h_bar),
            mean_theta_bar: avg(&theta_bar),
            mean_breadth: avg(&empirical),
        }
    };
    let mut window_rows = vec![window_means("Full sample", &|_| true)];
    for w in windows {
        window_rows.push(window_means(&w.name, &|d| w.contains(d)));
    }

    Ok(MarketFitReport {
        spearman_predicted: stats::spearman(&predicted, &empirical),
        spearman_h_bar: stats::spearman(&h_bar, &empirical),
        spearman_theta_bar: stats::spearman(&theta_bar, &empirical),
        h_bar_mean: stats::mean(&h_bar),
        h_bar_std: stats::std_dev(&h_bar),
        windows: window_rows,
        dates,
        predicted,
        empirical,
        h_bar,
        theta_bar,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub up: u64,
    /// Mean model probability of the observations in the bin.
    pub mean_predicted: Option<f64>,
}

impl CalibrationBin {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Observed frequency of an up move; `None` for an empty bin.
    pub fn empirical_freq(&self) -> Option<f64> {
        (self.count > 0).then(|| self.up as f64 / self.count as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationTable {
    pub bins: Vec<CalibrationBin>,
}

impl CalibrationTable {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count,empirical_freq\n");
        for b in &self.bins {
            let freq = b.empirical_freq().map_or_else(|| "n/a".to_string(), |f| f.to_string());
            out.push_str(&format!("{},{},{},{}\n", b.lo, b.hi, b.count, freq));
        }
        out
    }
}

/// Groups every stock-transition by its predicted up probability into
/// `bins` equal cells on `[0, 1]` (the last cell is closed).
pub fn calibration_table(model: &KineticIsingModel, panel: &SpinPanel, bins: usize) -> Result<CalibrationTable> {
    if bins == 0 {
        return Err(Error::InvalidInput("calibration needs at least one bin".into()));
    }
    check_panel(model, panel)?;
    let tr = Transitions::new(model, panel)?;
    let theta = tr.fields(model);
    let mut count = vec![0u64; bins];
    let mut up = vec![0u64; bins];
    let mut p_sum = vec![0.0f64; bins];
    for (th, s) in theta.iter().zip(tr.next.iter()) {
        let p = 0.5 * (1.0 + th.tanh());
        let b = ((p * bins as f64) as usize).min(bins - 1);
        count[b] += 1;
        p_sum[b] += p;
        if *s > 0.0 {
            up[b] += 1;
        }
    }
    let bins = (0..bins)
        .map(|b| CalibrationBin {
            lo: b as f64 / bins as f64,
            hi: (b + 1) as f64 / bins as f64,
            count: count[b],
            up: up[b],
            mean_predicted: (count[b] > 0).then(|| p_sum[b] / count[b] as f64),
        })
        .collect();
    Ok(CalibrationTable { bins })
}

/// Model-implied `corr(s_i(t+1), s_j(t))`.
///
/// The next-day spin enters only through its conditional mean
/// `mu_i(t) = tanh theta_i(t)`: the covariance is
/// `mean(mu_i s_j) - mean(mu_i) mean(s_j)` and the variance of `s_i(t+1)` is
/// `1 - mean(mu_i^2) + var(mu_i)` (conditional plus between-day variance).
/// The standard deviation of `s_j(t)` is empirical.
pub fn model_lag1_correlations(model: &KineticIsingModel, panel: &SpinPanel) -> Result<Lag1Correlations> {
    check_panel(model, panel)?;
    let tr = Transitions::new(model, panel)?;
    let mu = tr.fields(model).mapv(f64::tanh);
    let count = tr.count() as f64;
    let mu_mean = mu.mean_axis(Axis(0)).expect("transitions >= 1");
    let prev_mean = tr.prev.mean_axis(Axis(0)).expect("transitions >= 1");
    let cross = mu.t().dot(&tr.prev) / count;
    let mu_sq = mu.mapv(|v| v * v).mean_axis(Axis(0)).expect("transitions >= 1");
    let n = model.n();
    let mut values = Array2::zeros((n, n));
    let mut degenerate = Array2::from_elem((n, n), false);
    for i in 0..n {
        let var_mu = (mu_sq[i] - mu_mean[i] * mu_mean[i]).max(0.0);
        let var_next = 1.0 - mu_sq[i] + var_mu;
        for j in 0..n {
            let var_prev = (1.0 - prev_mean[j] * prev_mean[j]).max(0.0);
            let denom = (var_next * var_prev).sqrt();
            if denom > 0.0 {
                let cov = cross[(i, j)] - mu_mean[i] * prev_mean[j];
                values[(i, j)] = (cov / denom).clamp(-1.0, 1.0);
            } else {
                degenerate[(i, j)] = true;
            }
        }
    }
    Ok(Lag1Correlations { values, degenerate })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMemorySummary {
    pub mean: f64,
    pub median: f64,
    /// Zeros count half toward each sign.
    pub fraction_positive: f64,
    pub fraction_negative: f64,
    /// Largest values first.
    pub top_positive: Vec<(String, f64)>,
    /// Most negative values first.
    pub top_negative: Vec<(String, f64)>,
}

impl SelfMemorySummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,value\n");
        out.push_str(&format!("mean,{}\n", self.mean));
        out.push_str(&format!("median,{}\n", self.median));
        out.push_str(&format!("fraction_positive,{}\n", self.fraction_positive));
        out.push_str(&format!("fraction_negative,{}\n", self.fraction_negative));
        for (rank, (t, v)) in self.top_positive.iter().enumerate() {
            out.push_str(&format!("top_positive_{}:{t},{v}\n", rank + 1));
        }
        for (rank, (t, v)) in self.top_negative.iter().enumerate() {
            out.push_str(&format!("top_negative_{}:{t},{v}\n", rank + 1));
        }
        out
    }
}

/// Summary of the self-memory vector with the `top_k` extremes on each side.
/// Ties are broken by ticker.
pub fn self_memory_summary(model: &KineticIsingModel, top_k: usize) -> SelfMemorySummary {
    let a = model.a.to_vec();
    let n = a.len() as f64;
    let pos = a.iter().filter(|&&v| v > 0.0).count() as f64;
    let zero = a.iter().filter(|&&v| v == 0.0).count() as f64;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&x, &y| a[y].total_cmp(&a[x]).then_with(|| model.tickers[x].cmp(&model.tickers[y])));
    let pick = |idx: &mut dyn Iterator<Item = &usize>, keep: &dyn Fn(f64) -> bool| {
        idx.filter(|&&i| keep(a[i]))
            .take(top_k)
            .map(|&i| (model.tickers[i].clone(), a[i]))
            .collect::<Vec<_>>()
    };
    let top_positive = pick(&mut order.iter(), &|v| v > 0.0);
    let mut neg_order = order.clone();
    neg_order.sort_by(|&x, &y| a[x].total_cmp(&a[y]).then_with(|| model.tickers[x].cmp(&model.tickers[y])));
    let top_negative = pick(&mut neg_order.iter(), &|v| v < 0.0);
    SelfMemorySummary {
        mean: stats::mean(&a),
        median: stats::median(&a),
        fraction_positive: (pos + 0.5 * zero) / n,
        fraction_negative: (n - pos - 0.5 * zero) / n,
        top_positive,
        top_negative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::{simulate, HatBasis};
    use crate::panel::lag1_cross_correlation;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1};

    fn hand_model() -> KineticIsingModel {
        KineticIsingModel::new(
            array![[0.2, 0.4], [-0.1, 0.3]],
            array![0.5, -0.25],
            array![[0.0, 0.3], [0.7, 0.0]],
            HatBasis::new(2, 3).unwrap(),
        )
        .unwrap()
    }

    fn hand_panel() -> SpinPanel {
        SpinPanel::synthetic(array![[1, -1], [-1, -1], [1, 1]]).unwrap()
    }

    #[test]
    fn decomposition_matches_hand_terms() {
        let d = field_decomposition(&hand_model(), &hand_panel()).unwrap();
        // k = 0: phi = (1, 0), s = (1, -1)
        assert_abs_diff_eq!(d.external[0], (0.2 - 0.1) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.self_memory[0], (0.5 * 1.0 + -0.25 * -1.0) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.interaction[0], (-0.3 + 0.7) / 2.0, epsilon = 1e-15);
        // k = 1: phi = (0, 1), s = (-1, -1)
        assert_abs_diff_eq!(d.external[1], (0.4 + 0.3) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.self_memory[1], (-0.5 + 0.25) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.interaction[1], (-0.3 - 0.7) / 2.0, epsilon = 1e-15);
        for k in 0..2 {
            assert_eq!(d.total[k] - (d.external[k] + d.self_memory[k] + d.interaction[k]), 0.0);
        }
        assert_eq!(d.dates, hand_panel().dates()[1..].to_vec());
        assert!(d.to_csv().starts_with("date,external,self,interaction,total\n2000-01-02,"));
    }

    #[test]
    fn without_memory_or_coupling_total_is_external() {
        let mut m = hand_model();
        m.a.fill(0.0);
        m.j.fill(0.0);
        let d = field_decomposition(&m, &hand_panel()).unwrap();
        assert_eq!(d.total, d.external);
    }

    #[test]
    fn calibration_conserves_observations() {
        let model = KineticIsingModel::zeros(3, HatBasis::new(2, 30).unwrap());
        let panel = simulate(&model, &[1, -1, 1], 29, 4).unwrap();
        let table = calibration_table(&model, &panel, 100).unwrap();
        assert_eq!(table.total(), 3 * 29);
        // p = 0.5 exactly lands in the bin starting at 0.5
        let full: Vec<_> = table.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].lo, 0.5);
        assert_eq!(table.to_csv().lines().count(), 101);
    }

    #[test]
    fn zero_model_implies_no_lag_correlation() {
        let model = KineticIsingModel::zeros(3, HatBasis::new(2, 50).unwrap());
        let panel = simulate(&model, &[1, -1, 1], 49, 5).unwrap();
        let c = model_lag1_correlations(&model, &panel).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn implied_lag_correlations_track_simulation() {
        let basis = HatBasis::new(3, 60_000).unwrap();
        let model = KineticIsingModel::new(
            array![[0.1, -0.2, 0.0], [0.2, 0.0, -0.1], [0.0, 0.1, 0.1]],
            array![0.2, -0.1, 0.0],
            array![[0.0, 0.4, -0.3], [0.3, 0.0, 0.2], [-0.4, 0.1, 0.0]],
            basis,
        )
        .unwrap();
        let panel = simulate(&model, &[1, 1, -1], 59_999, 6).unwrap();
        let implied = model_lag1_correlations(&model, &panel).unwrap();
        let empirical = lag1_cross_correlation(&panel).unwrap();
        for (a, b) in implied.values.iter().zip(empirical.values.iter()) {
            assert!((a - b).abs() < 0.02, "{a} vs {b}");
            assert!(a.abs() <= 1.0);
        }
    }

    #[test]
    fn market_fit_aligns_with_the_next_day() {
        let model = hand_model();
        let panel = hand_panel();
        let windows = vec![DateWindow::new(
            "second day only",
            NaiveDate::from_ymd_opt(2000, 1, 2).unwrap(),
            NaiveDate::from_ymd_opt(2000, 1, 2).unwrap(),
        )];
        let r = market_fit_report(&model, &panel, &windows).unwrap();
        assert_eq!(r.empirical, vec![-1.0, 1.0]);
        let d = field_decomposition(&model, &panel).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(r.theta_bar[k], d.total[k], epsilon = 1e-15);
            assert_abs_diff_eq!(r.h_bar[k], d.external[k], epsilon = 1e-15);
        }
        assert_eq!(r.windows[0].name, "Full sample");
        assert_eq!(r.windows[0].transitions, 2);
        assert_eq!(r.windows[1].transitions, 1);
        assert_eq!(r.windows[1].mean_breadth, Some(-1.0));
        assert!(r.windows_csv().contains("Full sample,2,"));
    }

    #[test]
    fn self_memory_tie_rule() {
        let basis = HatBasis::new(2, 10).unwrap();
        let mut m = KineticIsingModel::zeros(4, basis.clone());
        let s = self_memory_summary(&m, 2);
        assert_eq!((s.mean, s.median, s.fraction_positive, s.fraction_negative), (0.0, 0.0, 0.5, 0.5));
        assert!(s.top_positive.is_empty() && s.top_negative.is_empty());

        m = KineticIsingModel::new(Array2::zeros((2, 2)), Array1::from(vec![-1.0, 1.0]), Array2::zeros((2, 2)), basis)
            .unwrap();
        let s = self_memory_summary(&m, 5);
        assert_eq!((s.mean, s.fraction_positive), (0.0, 0.5));
        assert_eq!(s.top_positive, vec![("S001".to_string(), 1.0)]);
        assert_eq!(s.top_negative, vec![("S000".to_string(), -1.0)]);
    }
}
