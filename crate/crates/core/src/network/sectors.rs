//! Sector-level aggregation of coupling matrices.

use ndarray::Array2;
use serde::Serialize;

use super::graph::{check_square, check_symmetric};
use crate::error::{Error, Result};
use crate::sector::Sector;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorMode {
    Signed,
    Abs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorMatrix {
    /// Sectors present in the input, in canonical order; `Unknown` is left out.
    pub sectors: Vec<Sector>,
    /// Mean of `J_ij` (or `|J_ij|`) over ordered pairs `i ≠ j` with
    /// `sector(i) = row` and `sector(j) = column`; `NaN` when no such pair.
    /// For directed couplings `i` is the target and `j` the source.
    pub values: Array2<f64>,
    pub counts: Array2<usize>,
    pub mode: SectorMode,
    pub directed: bool,
    /// Pooled over all same-sector ordered pairs.
    pub within_mean: f64,
    /// Pooled over all cross-sector ordered pairs.
    pub between_mean: f64,
}

impl SectorMatrix {
    /// `within / between`; `None` when the between mean is zero or undefined.
    pub fn ratio(&self) -> Option<f64> {
        (self.between_mean != 0.0 && self.between_mean.is_finite() && self.within_mean.is_finite())
            .then(|| self.within_mean / self.between_mean)
    }

    pub fn get(&self, row: Sector, col: Sector) -> Option<f64> {
        let a = self.sectors.iter().position(|&s| s == row)?;
        let b = self.sectors.iter().position(|&s| s == col)?;
        Some(self.values[(a, b)])
    }

    /// Diagonal entries sorted from largest to smallest (ties by sector order).
    pub fn ranked_within(&self) -> Vec<(Sector, f64)> {
        let mut out: Vec<(Sector, f64)> = self
            .sectors
            .iter()
            .enumerate()
            .filter(|(a, _)| self.counts[(*a, *a)] > 0)
            .map(|(a, &s)| (s, self.values[(a, a)]))
            .collect();
        out.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        out
    }

    /// Long-format CSV: `row_sector,col_sector,value,pairs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_sector,col_sector,value,pairs\n");
        for (a, ra) in self.sectors.iter().enumerate() {
            for (b, cb) in self.sectors.iter().enumerate() {
                let v = self.values[(a, b)];
                let v = if v.is_nan() { "n/a".to_string() } else { v.to_string() };
                out.push_str(&format!("{},{},{},{}\n", ra.name(), cb.name(), v, self.counts[(a, b)]));
            }
        }
        out
    }
}

fn present_sectors(sectors: &[Sector]) -> Vec<Sector> {
    Sector::ALL.iter().copied().filter(|s| sectors.contains(s)).collect()
}

/// Sector-pair means of the couplings. Undirected mode requires a symmetric
/// matrix and then yields a symmetric result.
pub fn sector_matrices(j: &Array2<f64>, sectors: &[Sector], mode: SectorMode, directed: bool) -> Result<SectorMatrix> {
    let n = sectors.len();
    check_square(j, n)?;
    if !directed {
        check_symmetric(j)?;
    }
    let present = present_sectors(sectors);
    let k = present.len();
    let slot: Vec<Option<usize>> = sectors.iter().map(|s| present.iter().position(|p| p == s)).collect();
    let mut sums = Array2::<f64>::zeros((k, k));
    let mut counts = Array2::<usize>::zeros((k, k));
    let (mut within, mut within_n, mut between, mut between_n) = (0.0, 0usize, 0.0, 0usize);
    for a in 0..n {
        for b in 0..n {
            let (Some(sa), Some(sb)) = (slot[a], slot[b]) else { continue };
            if a == b {
                continue;
            }
            let v = match mode {
                SectorMode::Signed => j[(a, b)],
                SectorMode::Abs => j[(a, b)].abs(),
            };
            sums[(sa, sb)] += v;
            counts[(sa, sb)] += 1;
            if sa == sb {
                within += v;
                within_n += 1;
            } else {
                between += v;
                between_n += 1;
            }
        }
    }
    let values = Array2::from_shape_fn((k, k), |(a, b)| {
        if counts[(a, b)] == 0 {
            f64::NAN
        } else {
            sums[(a, b)] / counts[(a, b)] as f64
        }
    });
    let pooled = |s: f64, c: usize| if c == 0 { f64::NAN } else { s / c as f64 };
    Ok(SectorMatrix {
        sectors: present,
        values,
        counts,
        mode,
        directed,
        within_mean: pooled(within, within_n),
        between_mean: pooled(between, between_n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorNode {
    pub sector: Sector,
    pub n_stocks: usize,
    pub mean_abs_h: f64,
    /// `NaN` for a single-stock sector.
    pub mean_within_abs_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorEdge {
    pub a: Sector,
    pub b: Sector,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorNetwork {
    pub nodes: Vec<SectorNode>,
    pub edges: Vec<SectorEdge>,
    pub percentile: f64,
    /// Percentile of the cross-sector means; `None` when the threshold is
    /// disabled (percentile 0) or there are no cross-sector means.
    pub threshold: Option<f64>,
}

impl SectorNetwork {
    /// Nodes sorted by mean `|h|`, largest first.
    pub fn ranked_by_field(&self) -> Vec<(Sector, f64)> {
        let mut out: Vec<(Sector, f64)> = self.nodes.iter().map(|n| (n.sector, n.mean_abs_h)).collect();
        out.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        out
    }

    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("sector,n_stocks,mean_abs_h,mean_within_abs_j\n");
        for n in &self.nodes {
            let w = if n.mean_within_abs_j.is_nan() { "n/a".to_string() } else { n.mean_within_abs_j.to_string() };
            out.push_str(&format!("{},{},{},{}\n", n.sector.name(), n.n_stocks, n.mean_abs_h, w));
        }
        out
    }

    pub fn edges_csv(&self) -> String {
        let mut out = String::from("sector_a,sector_b,mean_abs_j\n");
        for e in &self.edges {
            out.push_str(&format!("{},{},{}\n", e.a.name(), e.b.name(), e.weight));
        }
        out
    }
}

/// Sector graph: nodes carry mean `|h_i|` and mean within-sector `|J_ij|`;
/// an edge joins two sectors when their mean `|J_ij|` strictly exceeds the
/// given percentile of all cross-sector means. Percentile 0 keeps every pair.
pub fn sector_network_summary(j: &Array2<f64>, h: &[f64], sectors: &[Sector], percentile: f64) -> Result<SectorNetwork> {
    if h.len() != sectors.len() {
        return Err(Error::InvalidInput("one field value per stock is required".into()));
    }
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::Config(format!("edge percentile must be in [0, 100], got {percentile}")));
    }
    let m = sector_matrices(j, sectors, SectorMode::Abs, false)?;
    let nodes = m
        .sectors
        .iter()
        .enumerate()
        .map(|(a, &s)| {
            let fields: Vec<f64> = (0..h.len()).filter(|&i| sectors[i] == s).map(|i| h[i].abs()).collect();
            SectorNode {
                sector: s,
                n_stocks: fields.len(),
                mean_abs_h: stats::mean(&fields),
                mean_within_abs_j: m.values[(a, a)],
            }
        })
        .collect();
    let k = m.sectors.len();
    let cross: Vec<(usize, usize, f64)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).map(|(a, b)| (a, b, m.values[(a, b)])).collect();
    let means: Vec<f64> = cross.iter().map(|c| c.2).collect();
    let threshold = (percentile > 0.0 && !means.is_empty()).then(|| stats::percentile(&means, percentile));
    let edges = cross
        .iter()
        .filter(|c| threshold.is_none_or(|t| c.2 > t))
        .map(|&(a, b, w)| SectorEdge {
            a: m.sectors[a],
            b: m.sectors[b],
            weight: w,
        })
        .collect();
    Ok(SectorNetwork {
        nodes,
        edges,
        percentile,
        threshold,
    })
}
