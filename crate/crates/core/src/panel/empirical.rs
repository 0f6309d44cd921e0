use chrono::NaiveDate;
use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::spins::SpinPanel;
use crate::error::{Error, Result};
use crate::stats::Histogram;

/// First moments `m1[i] = <s_i>` and second moments `m2[i][j] = <s_i s_j>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m1: Array1<f64>,
    pub m2: Array2<f64>,
}

impl MomentSet {
    pub fn new(m1: Array1<f64>, m2: Array2<f64>) -> Result<Self> {
        let n = m1.len();
        if m2.dim() != (n, n) {
            return Err(Error::InvalidInput(format!("m2 must be {n}x{n}, got {:?}", m2.dim())));
        }
        for i in 0..n {
            if m2[(i, i)] != 1.0 {
                return Err(Error::InvalidInput("m2 must have a unit diagonal".into()));
            }
            for j in 0..i {
                if m2[(i, j)] != m2[(j, i)] {
                    return Err(Error::InvalidInput("m2 must be symmetric".into()));
                }
            }
        }
        if m1.iter().chain(m2.iter()).any(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidInput("moments must lie in [-1, 1]".into()));
        }
        Ok(MomentSet { m1, m2 })
    }

    pub fn n(&self) -> usize {
        self.m1.len()
    }

    /// Largest absolute difference over the means and the off-diagonal
    /// second moments; NaN if any residual is NaN.
    pub fn max_abs_residual(&self, other: &MomentSet) -> f64 {
        self.residuals(other)
            .iter()
            .fold(0.0, |acc, r| if r.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(r.abs()) })
    }

    pub fn rms_residual(&self, other: &MomentSet) -> f64 {
        let r = self.residuals(other);
        (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
    }

    /// Differences `self - other`: `n` means followed by the upper-triangle
    /// pairs in row-major order.
    pub fn residuals(&self, other: &MomentSet) -> Vec<f64> {
        let n = self.n();
        let mut out: Vec<f64> = (0..n).map(|i| self.m1[i] - other.m1[i]).collect();
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.m2[(i, j)] - other.m2[(i, j)]);
            }
        }
        out
    }

    /// Pearson correlation of spins `i` and `j` implied by the moments.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        let cov = self.m2[(i, j)] - self.m1[i] * self.m1[j];
        let var = (1.0 - self.m1[i].powi(2)) * (1.0 - self.m1[j].powi(2));
        if var <= 0.0 {
            0.0
        } else {
            cov / var.sqrt()
        }
    }
}

pub fn empirical_moments(sp: &SpinPanel) -> MomentSet {
    let x = sp.to_f64();
    let t = sp.n_days() as f64;
    let m1 = x.sum_axis(Axis(0)) / t;
    let mut m2 = x.t().dot(&x) / t;
    for i in 0..m2.nrows() {
        m2[(i, i)] = 1.0;
        for j in 0..i {
            m2[(i, j)] = m2[(j, i)];
        }
    }
    MomentSet { m1, m2 }
}

/// Cross-sectional mean spin on day `t`.
pub fn breadth(sp: &SpinPanel, t: usize) -> f64 {
    let row = sp.row(t);
    row.iter().map(|&s| f64::from(s)).sum::<f64>() / row.len() as f64
}

pub fn breadth_series(sp: &SpinPanel) -> Vec<f64> {
    (0..sp.n_days()).map(|t| breadth(sp, t)).collect()
}

/// Histogram of daily breadth on `[-1, 1]`.
pub fn breadth_histogram(sp: &SpinPanel, bins: usize) -> Histogram {
    Histogram::with_range(breadth_series(sp), bins, -1.0, 1.0)
}

/// Lag-one cross correlations `corr(s_i(t+1), s_j(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lag1Correlations {
    pub values: Array2<f64>,
    /// Set where either series has zero variance; the value is then 0.
    pub degenerate: Array2<bool>,
}

pub fn lag1_cross_correlation(sp: &SpinPanel) -> Result<Lag1Correlations> {
    let t = sp.n_days();
    if t < 3 {
        return Err(Error::InsufficientData(format!(
            "lag-1 correlations need at least 3 days, got {t}"
        )));
    }
    let x = sp.to_f64();
    let next = x.slice(s![1.., ..]);
    let prev = x.slice(s![..t - 1, ..]);
    let pairs = (t - 1) as f64;
    let next_c = &next - &next.mean_axis(Axis(0)).expect("non-empty");
    let prev_c = &prev - &prev.mean_axis(Axis(0)).expect("non-empty");
    let cov = next_c.t().dot(&prev_c) / pairs;
    let sd_next = next_c.mapv(|v| v * v).sum_axis(Axis(0)).mapv(|v| (v / pairs).sqrt());
    let sd_prev = prev_c.mapv(|v| v * v).sum_axis(Axis(0)).mapv(|v| (v / pairs).sqrt());
    let n = sp.n_stocks();
    let mut values = Array2::zeros((n, n));
    let mut degenerate = Array2::from_elem((n, n), false);
    for i in 0..n {
        for j in 0..n {
            let denom = sd_next[i] * sd_prev[j];
            if denom > 0.0 {
                values[(i, j)] = (cov[(i, j)] / denom).clamp(-1.0, 1.0);
            } else {
                degenerate[(i, j)] = true;
            }
        }
    }
    Ok(Lag1Correlations { values, degenerate })
}

/// Named inclusive date range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(name: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Self {
        DateWindow {
            name: name.into(),
            start,
            end,
        }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }

    /// Early sample, dot-com bust, global financial crisis and COVID windows.
    pub fn defaults() -> Vec<DateWindow> {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        vec![
            DateWindow::new("Early sample", d(1996, 1, 1), d(2004, 12, 31)),
            DateWindow::new("Dot-com bust", d(2000, 6, 1), d(2002, 6, 1)),
            DateWindow::new("GFC", d(2007, 10, 1), d(2008, 10, 1)),
            DateWindow::new("COVID", d(2020, 1, 1), d(2021, 1, 1)),
        ]
    }
}

/// Mean breadth over the days inside `window`.
pub fn window_mean(sp: &SpinPanel, window: &DateWindow) -> Result<f64> {
    let values: Vec<f64> = (0..sp.n_days())
        .filter(|&t| window.contains(sp.dates()[t]))
        .map(|t| breadth(sp, t))
        .collect();
    if values.is_empty() {
        return Err(Error::InsufficientData(format!("window {:?} contains no days", window.name)));
    }
    Ok(crate::stats::mean(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    #[test]
    fn hand_averaged_moments() {
        let sp = SpinPanel::synthetic(array![[1, 1], [-1, -1], [1, -1]]).unwrap();
        let m = empirical_moments(&sp);
        assert_abs_diff_eq!(m.m1[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.m1[1], -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.m2[(0, 1)], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(m.m2[(0, 0)], 1.0);
    }

    #[test]
    fn constant_and_single_row_panels() {
        let m = empirical_moments(&SpinPanel::synthetic(Array2::from_elem((5, 3), 1)).unwrap());
        assert!(m.m1.iter().all(|&v| v == 1.0));
        assert!(m.m2.iter().all(|&v| v == 1.0));
        let m = empirical_moments(&SpinPanel::synthetic(array![[1, -1, -1]]).unwrap());
        assert_eq!(m.m2[(0, 1)], -1.0);
        assert_eq!(m.m2[(1, 2)], 1.0);
    }

    #[test]
    fn breadth_examples() {
        let sp = SpinPanel::synthetic(array![[1, 1, 1, 1, 1, 1], [1, 1, -1, -1, 1, -1]]).unwrap();
        assert_eq!(breadth(&sp, 0), 1.0);
        assert_eq!(breadth(&sp, 1), 0.0);
    }

    #[test]
    fn breadth_histogram_two_rows() {
        let sp = SpinPanel::synthetic(array![[1, 1], [-1, -1]]).unwrap();
        assert_eq!(breadth_histogram(&sp, 2).counts, vec![1, 1]);
        let one = SpinPanel::synthetic(array![[1, -1, 1]]).unwrap();
        let h = breadth_histogram(&one, 7);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn lag1_perfect_and_degenerate() {
        // column 0 at t+1 copies column 1 at t; column 2 is constant
        let sp = SpinPanel::synthetic(array![
            [1, 1, 1],
            [1, -1, 1],
            [-1, 1, 1],
            [1, -1, 1],
            [-1, -1, 1],
            [-1, 1, 1]
        ])
        .unwrap();
        let c = lag1_cross_correlation(&sp).unwrap();
        assert_abs_diff_eq!(c.values[(0, 1)], 1.0, epsilon = 1e-12);
        assert!(c.degenerate[(0, 2)]);
        assert!(c.degenerate[(2, 0)]);
        assert_eq!(c.values[(2, 0)], 0.0);
    }

    #[test]
    fn lag1_hand_computed_pearson() {
        // pairs over t = 0..3: x = s_0(t+1) = (1, 1, -1, 1), y = s_1(t) = (1, -1, -1, 1)
        // mean x = 0.5, mean y = 0; cov = (0.5*1 + 0.5*-1 + -1.5*-1 + 0.5*1)/4 = 0.5
        // var x = (0.25*3 + 2.25)/4 = 0.75, var y = 1 -> r = 0.5 / sqrt(0.75)
        let sp = SpinPanel::synthetic(array![[1, 1], [1, -1], [1, -1], [-1, 1], [1, 1]]).unwrap();
        let c = lag1_cross_correlation(&sp).unwrap();
        assert_abs_diff_eq!(c.values[(0, 1)], 0.5 / 0.75f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn lag1_needs_three_days() {
        let sp = SpinPanel::synthetic(array![[1, 1], [1, -1]]).unwrap();
        assert!(matches!(lag1_cross_correlation(&sp), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn window_means() {
        let sp = SpinPanel::synthetic(array![[1, 1], [1, -1], [-1, -1]]).unwrap();
        let all = DateWindow::new("all", sp.dates()[0], sp.dates()[2]);
        assert_abs_diff_eq!(window_mean(&sp, &all).unwrap(), 0.0, epsilon = 1e-15);
        let first = DateWindow::new("first", sp.dates()[0], sp.dates()[0]);
        assert_eq!(window_mean(&sp, &first).unwrap(), 1.0);
        let empty = DateWindow::new("none", NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(), NaiveDate::from_ymd_opt(1990, 2, 1).unwrap());
        assert!(window_mean(&sp, &empty).is_err());
    }

    fn spin_matrix() -> impl Strategy<Value = Array2<i8>> {
        (3usize..12, 2usize..6).prop_flat_map(|(t, n)| {
            proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], t * n)
                .prop_map(move |v| Array2::from_shape_vec((t, n), v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn moment_invariants(spins in spin_matrix()) {
            let m = empirical_moments(&SpinPanel::synthetic(spins).unwrap());
            prop_assert!(MomentSet::new(m.m1.clone(), m.m2.clone()).is_ok());
        }

        #[test]
        fn lag1_diagonal_is_autocorrelation(spins in spin_matrix()) {
            let sp = SpinPanel::synthetic(spins).unwrap();
            let c = lag1_cross_correlation(&sp).unwrap();
            let t = sp.n_days();
            for i in 0..sp.n_stocks() {
                let x: Vec<f64> = (1..t).map(|k| f64::from(sp.spins()[(k, i)])).collect();
                let y: Vec<f64> = (0..t - 1).map(|k| f64::from(sp.spins()[(k, i)])).collect();
                let r = crate::stats::pearson(&x, &y);
                prop_assert!((r.value - c.values[(i, i)]).abs() < 1e-12);
                prop_assert_eq!(r.degenerate, c.degenerate[(i, i)]);
            }
        }

        #[test]
        fn breadth_histogram_conserves_days(spins in spin_matrix(), bins in 1usize..30) {
            let sp = SpinPanel::synthetic(spins).unwrap();
            prop_assert_eq!(breadth_histogram(&sp, bins).total(), sp.n_days() as u64);
        }
    }
}
