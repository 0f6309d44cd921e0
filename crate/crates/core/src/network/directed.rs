//! Diagnostics for directed (kinetic) couplings, where `J[(i, j)]` is the
//! influence of source `j` on target `i`.

use ndarray::Array2;
use serde::Serialize;

use super::graph::{check_square, node_strength};
use crate::error::{Error, Result};
use crate::stats::{self, Correlation, Histogram};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectedStrengths {
    /// Row sums of `|J|`: influence received.
    pub in_strength: Vec<f64>,
    /// Column sums of `|J|`: influence exerted.
    pub out_strength: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn directed_strengths(j: &Array2<f64>) -> Result<DirectedStrengths> {
    check_square(j, j.nrows())?;
    let in_strength = node_strength(j).to_vec();
    let out_strength = node_strength(&j.t().to_owned()).to_vec();
    let total = in_strength.iter().zip(&out_strength).map(|(a, b)| a + b).collect();
    Ok(DirectedStrengths {
        in_strength,
        out_strength,
        total,
    })
}

/// `‖J - Jᵀ‖_F / ‖J‖_F`: 0 for symmetric and 2 for antisymmetric couplings,
/// about `√2` when `J_ij` and `J_ji` are unrelated.
pub fn asymmetry_index(j: &Array2<f64>) -> Result<f64> {
    check_square(j, j.nrows())?;
    let norm = j.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput("asymmetry index is undefined for an all-zero matrix".into()));
    }
    let diff = (j - &j.t()).iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(diff / norm)
}

/// Spearman and Pearson correlation of `J_ij` against `J_ji` over `i < j`.
pub fn symmetry_correlations(j: &Array2<f64>) -> Result<(Correlation, Correlation)> {
    check_square(j, j.nrows())?;
    let n = j.nrows();
    let (mut upper, mut lower) = (Vec::new(), Vec::new());
    for a in 0..n {
        for b in a + 1..n {
            upper.push(j[(a, b)]);
            lower.push(j[(b, a)]);
        }
    }
    Ok((stats::spearman(&upper, &lower), stats::pearson(&upper, &lower)))
}

/// Summary of the off-diagonal entries of a coupling matrix. Symmetric
/// input is summarized over `i < j`, directed input over all `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub mean_abs: f64,
    pub p90_abs: f64,
}

pub fn coupling_summary(j: &Array2<f64>, directed: bool) -> Result<CouplingSummary> {
    check_square(j, j.nrows())?;
    let values = off_diagonal(j, directed);
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    Ok(CouplingSummary {
        count: values.len(),
        mean: stats::mean(&values),
        std: stats::std_dev(&values),
        mean_abs: stats::mean(&abs),
        p90_abs: stats::percentile(&abs, 90.0),
    })
}

fn off_diagonal(j: &Array2<f64>, directed: bool) -> Vec<f64> {
    let n = j.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1));
    for a in 0..n {
        for b in 0..n {
            if a != b && (directed || a < b) {
                out.push(j[(a, b)]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrengthComparison {
    pub tickers: Vec<String>,
    pub static_strength: Vec<f64>,
    pub kinetic: DirectedStrengths,
    pub spearman_total: Correlation,
    pub spearman_in: Correlation,
    pub spearman_out: Correlation,
}

impl StrengthComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ticker,static_strength,kinetic_total,kinetic_in,kinetic_out\n");
        for i in 0..self.tickers.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.tickers[i],
                self.static_strength[i],
                self.kinetic.total[i],
                self.kinetic.in_strength[i],
                self.kinetic.out_strength[i]
            ));
        }
        out
    }
}

/// Pairs static node strength with kinetic total, incoming and outgoing
/// strength per stock.
pub fn static_vs_kinetic_strength(
    j_static: &Array2<f64>,
    j_kinetic: &Array2<f64>,
    tickers: &[String],
) -> Result<StrengthComparison> {
    let n = tickers.len();
    check_square(j_static, n)?;
    check_square(j_kinetic, n)?;
    let static_strength = node_strength(j_static).to_vec();
    let kinetic = directed_strengths(j_kinetic)?;
    Ok(StrengthComparison {
        tickers: tickers.to_vec(),
        spearman_total: stats::spearman(&static_strength, &kinetic.total),
        spearman_in: stats::spearman(&static_strength, &kinetic.in_strength),
        spearman_out: stats::spearman(&static_strength, &kinetic.out_strength),
        static_strength,
        kinetic,
    })
}

/// Histograms of the fields and of the `N(N-1)/2` unique couplings.
pub fn parameter_histograms(h: &[f64], j: &Array2<f64>, bins: usize) -> Result<(Histogram, Histogram)> {
    check_square(j, h.len())?;
    if bins == 0 {
        return Err(Error::InvalidInput("histograms need at least one bin".into()));
    }
    Ok((Histogram::auto(h, bins), Histogram::auto(&off_diagonal(j, false), bins)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn strengths_by_hand() {
        let j = array![[0.0, 0.4, -0.1], [0.0, 0.0, 0.2], [0.3, -0.5, 0.0]];
        let s = directed_strengths(&j).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&s.in_strength, &[0.5, 0.2, 0.8]));
        assert!(close(&s.out_strength, &[0.3, 0.9, 0.3]));
        assert!(close(&s.total, &[0.8, 1.1, 1.1]));
        let one = array![[0.0, 0.4], [0.0, 0.0]];
        let s = directed_strengths(&one).unwrap();
        assert_eq!((s.in_strength[0], s.out_strength[1]), (0.4, 0.4));
        let sym = array![[0.0, 0.4, -0.1], [0.4, 0.0, 0.2], [-0.1, 0.2, 0.0]];
        let s = directed_strengths(&sym).unwrap();
        assert_eq!(s.in_strength, s.out_strength);
    }

    #[test]
    fn asymmetry_extremes_and_scale_invariance() {
        let sym = array![[0.0, 0.4, -0.1], [0.4, 0.0, 0.2], [-0.1, 0.2, 0.0]];
        assert_eq!(asymmetry_index(&sym).unwrap(), 0.0);
        let anti = array![[0.0, 0.4, -0.1], [-0.4, 0.0, 0.2], [0.1, -0.2, 0.0]];
        assert!((asymmetry_index(&anti).unwrap() - 2.0).abs() < 1e-15);
        let j = array![[0.0, 0.3, 0.7], [-0.2, 0.0, 0.1], [0.5, 0.9, 0.0]];
        for c in [-3.0, 0.01, 250.0] {
            assert!((asymmetry_index(&(&j * c)).unwrap() - asymmetry_index(&j).unwrap()).abs() < 1e-14);
        }
        assert!(asymmetry_index(&Array2::zeros((3, 3))).is_err());
    }

    #[test]
    fn symmetry_correlation_extremes() {
        let sym = array![[0.0, 0.4, -0.1], [0.4, 0.0, 0.2], [-0.1, 0.2, 0.0]];
        let (s, p) = symmetry_correlations(&sym).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12 && (p.value - 1.0).abs() < 1e-12);
        let anti = -&sym + &(2.0 * &Array2::from_shape_fn((3, 3), |(a, b)| if a < b { sym[(a, b)] } else { 0.0 }));
        let (_, p) = symmetry_correlations(&anti).unwrap();
        assert!((p.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_matrices_rank_identically() {
        let j = array![[0.0, 0.4, -0.1, 0.0], [0.4, 0.0, 0.2, 0.3], [-0.1, 0.2, 0.0, 0.6], [0.0, 0.3, 0.6, 0.0]];
        let t = crate::panel::default_tickers(4);
        let c = static_vs_kinetic_strength(&j, &j, &t).unwrap();
        for r in [c.spearman_total, c.spearman_in, c.spearman_out] {
            assert!((r.value - 1.0).abs() < 1e-12);
        }
        assert!(c.to_csv().starts_with("ticker,static_strength,kinetic_total,kinetic_in,kinetic_out\nS000,0.5,1,"));
    }

    #[test]
    fn independent_matrices_are_uncorrelated() {
        let n = 306;
        let mut rng = crate::rng::stream(21, 0);
        let mut draw = || Array2::from_shape_fn((n, n), |(a, b)| if a == b { 0.0 } else { rng.random_range(-1.0..1.0) });
        let a = draw();
        let a = crate::network::symmetrize(&a);
        let b = draw();
        let c = static_vs_kinetic_strength(&a, &b, &crate::panel::default_tickers(n)).unwrap();
        // null standard deviation of Spearman is about 1/sqrt(n-1) = 0.057
        assert!(c.spearman_total.value.abs() < 4.0 / ((n - 1) as f64).sqrt());
    }

    #[test]
    fn summary_and_histograms() {
        let j = array![[0.0, 0.4, -0.1], [0.0, 0.0, 0.2], [0.3, -0.5, 0.0]];
        let s = coupling_summary(&j, true).unwrap();
        assert_eq!(s.count, 6);
        assert!((s.mean - 0.05).abs() < 1e-15);
        assert!((s.mean_abs - 1.5 / 6.0).abs() < 1e-15);
        let sym = crate::network::symmetrize(&j);
        assert_eq!(coupling_summary(&sym, false).unwrap().count, 3);
        let (hh, hj) = parameter_histograms(&[0.1, 0.1, 0.1], &sym, 5).unwrap();
        assert_eq!(hh.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!((hh.total(), hj.total()), (3, 3));
        // hand placement: unique couplings 0.2, 0.1, -0.15 over [-0.15, 0.2] in 5 bins of 0.07
        let (_, hj) = parameter_histograms(&[0.0; 3], &sym, 5).unwrap();
        assert_eq!(hj.counts, vec![1, 0, 0, 1, 1]);
    }
}
