use ndarray::Array2;
use serde::Serialize;

use super::graph::{check_square, node_strength};
use super::retained_count;
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProminenceRow {
    pub ticker: String,
    pub h: f64,
    pub strength: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProminenceResult {
    pub rows: Vec<ProminenceRow>,
    /// Indices of the selected stocks, largest radius first.
    pub selected: Vec<usize>,
    /// Smallest selected radius.
    pub boundary_radius: f64,
    pub p90_abs_h: f64,
    pub p90_strength: f64,
    /// Set when a zero 90th percentile forces a unit scale, or when the
    /// boundary radius is shared with an unselected stock.
    pub degenerate: bool,
}

impl ProminenceResult {
    pub fn selected_tickers(&self) -> Vec<&str> {
        self.selected.iter().map(|&i| self.rows[i].ticker.as_str()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ticker,h,strength,radius,selected\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.ticker,
                r.h,
                r.strength,
                r.radius,
                self.selected.contains(&i)
            ));
        }
        out
    }
}

/// Ranks stocks by `sqrt((|h_i| / P90|h|)^2 + (s_i / P90 s)^2)` with
/// `s_i = Σ_j |J_ij|` and selects the `ceil(top_fraction · N)` largest.
/// Ties go to the earlier ticker.
pub fn prominence_select(h: &[f64], j: &Array2<f64>, tickers: &[String], top_fraction: f64) -> Result<ProminenceResult> {
    let n = h.len();
    check_square(j, n)?;
    if tickers.len() != n {
        return Err(Error::InvalidInput("one ticker per stock is required".into()));
    }
    if n == 0 {
        return Err(Error::InsufficientData("prominence selection needs at least one stock".into()));
    }
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::Config(format!("prominence fraction must be in (0, 1], got {top_fraction}")));
    }
    let abs_h: Vec<f64> = h.iter().map(|v| v.abs()).collect();
    let strength = node_strength(j).to_vec();
    let p90_abs_h = stats::percentile(&abs_h, 90.0);
    let p90_strength = stats::percentile(&strength, 90.0);
    let mut degenerate = false;
    let mut scale = |p: f64| {
        if p > 0.0 {
            p
        } else {
            degenerate = true;
            1.0
        }
    };
    let (sx, sy) = (scale(p90_abs_h), scale(p90_strength));
    let rows: Vec<ProminenceRow> = (0..n)
        .map(|i| ProminenceRow {
            ticker: tickers[i].clone(),
            h: h[i],
            strength: strength[i],
            radius: (abs_h[i] / sx).hypot(strength[i] / sy),
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rows[b].radius.total_cmp(&rows[a].radius).then_with(|| rows[a].ticker.cmp(&rows[b].ticker)));
    let count = retained_count(n, top_fraction).max(1);
    let selected: Vec<usize> = order[..count].to_vec();
    let boundary_radius = rows[*selected.last().expect("count >= 1")].radius;
    if let Some(&next) = order.get(count) {
        degenerate |= rows[next].radius == boundary_radius;
    }
    Ok(ProminenceResult {
        rows,
        selected,
        boundary_radius,
        p90_abs_h,
        p90_strength,
        degenerate,
    })
}
