use std::path::Path;

use chrono::NaiveDate;
use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use super::prices::PricePanel;
use crate::error::{Error, Result};
use crate::sector::{csv_error, Sector, SectorTable};

/// Binarized movements before the completeness rule is applied.
/// `cells` holds `+1`, `-1`, or `0` for a discarded observation.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarizedPanel {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    pub sectors: Vec<Sector>,
    pub cells: Array2<i8>,
    /// Discarded observations per ticker.
    pub missing: Vec<usize>,
}

/// `+1` when the close is strictly above the open, `-1` otherwise (ties
/// included). Observations lacking either price are discarded.
pub fn binarize(prices: &PricePanel) -> BinarizedPanel {
    let cells = ndarray::Zip::from(&prices.open)
        .and(&prices.close)
        .map_collect(|o, c| match (o, c) {
            (Some(o), Some(c)) if c > o => 1i8,
            (Some(_), Some(_)) => -1,
            _ => 0,
        });
    let missing = cells
        .axis_iter(Axis(1))
        .map(|col| col.iter().filter(|&&v| v == 0).count())
        .collect();
    BinarizedPanel {
        dates: prices.dates.clone(),
        tickers: prices.tickers.clone(),
        sectors: prices.sectors.clone(),
        cells,
        missing,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletenessRule {
    /// Keep every date and drop any ticker with a gap.
    #[default]
    DropTickers,
    /// Drop every date with a gap first; all tickers then survive.
    DropDates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_days: usize,
    pub input_tickers: usize,
    pub dropped_tickers: Vec<String>,
    pub dropped_days: usize,
    pub days: usize,
    pub tickers: usize,
}

pub fn filter_complete(panel: &BinarizedPanel, rule: CompletenessRule) -> Result<(SpinPanel, FilterReport)> {
    let (t_all, n_all) = panel.cells.dim();
    let (keep_rows, keep_cols): (Vec<usize>, Vec<usize>) = match rule {
        CompletenessRule::DropTickers => (
            (0..t_all).collect(),
            (0..n_all).filter(|&i| panel.missing[i] == 0).collect(),
        ),
        CompletenessRule::DropDates => (
            (0..t_all)
                .filter(|&t| panel.cells.row(t).iter().all(|&v| v != 0))
                .collect(),
            (0..n_all).collect(),
        ),
    };
    if keep_cols.is_empty() || keep_rows.is_empty() {
        return Err(Error::EmptyPanel(
            "no ticker is observed on every retained date".into(),
        ));
    }
    let spins = panel.cells.select(Axis(0), &keep_rows).select(Axis(1), &keep_cols);
    let report = FilterReport {
        input_days: t_all,
        input_tickers: n_all,
        dropped_tickers: (0..n_all)
            .filter(|i| !keep_cols.contains(i))
            .map(|i| panel.tickers[i].clone())
            .collect(),
        dropped_days: t_all - keep_rows.len(),
        days: keep_rows.len(),
        tickers: keep_cols.len(),
    };
    let sp = SpinPanel::new(
        keep_rows.iter().map(|&t| panel.dates[t]).collect(),
        keep_cols.iter().map(|&i| panel.tickers[i].clone()).collect(),
        spins,
    )?
    .with_sector_labels(keep_cols.iter().map(|&i| panel.sectors[i]).collect());
    Ok((sp, report))
}

/// Dense `T × N` matrix of `±1` daily movements.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    sectors: Vec<Sector>,
    spins: Array2<i8>,
}

impl SpinPanel {
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, spins: Array2<i8>) -> Result<Self> {
        let (t, n) = spins.dim();
        if t != dates.len() || n != tickers.len() {
            return Err(Error::InvalidInput(format!(
                "spin matrix is {t}x{n} but there are {} dates and {} tickers",
                dates.len(),
                tickers.len()
            )));
        }
        if t == 0 || n == 0 {
            return Err(Error::EmptyPanel("spin panel needs at least one day and one ticker".into()));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("dates must be strictly increasing".into()));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("spin entries must be -1 or +1".into()));
        }
        Ok(SpinPanel {
            dates,
            tickers,
            sectors: vec![Sector::Unknown; n],
            spins,
        })
    }

    /// Panel with synthetic consecutive calendar dates starting 2000-01-01
    /// and tickers `S000`, `S001`, ...
    pub fn synthetic(spins: Array2<i8>) -> Result<Self> {
        let (t, n) = spins.dim();
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = start.iter_days().take(t).collect();
        SpinPanel::new(dates, default_tickers(n), spins)
    }

    pub fn with_sectors(self, table: &SectorTable) -> Self {
        let sectors = self.tickers.iter().map(|t| table.get(t)).collect();
        self.with_sector_labels(sectors)
    }

    pub fn with_sector_labels(mut self, sectors: Vec<Sector>) -> Self {
        assert_eq!(sectors.len(), self.tickers.len(), "one sector label per ticker");
        self.sectors = sectors;
        self
    }

    pub fn n_days(&self) -> usize {
        self.spins.nrows()
    }

    pub fn n_stocks(&self) -> usize {
        self.spins.ncols()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn spins(&self) -> &Array2<i8> {
        &self.spins
    }

    pub fn row(&self, t: usize) -> ArrayView1<'_, i8> {
        self.spins.row(t)
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.spins.mapv(f64::from)
    }

    pub fn row_f64(&self, t: usize) -> Array1<f64> {
        self.spins.row(t).mapv(f64::from)
    }

    /// Sub-panel restricted to the given ticker columns.
    pub fn select_stocks(&self, columns: &[usize]) -> Result<Self> {
        let sp = SpinPanel::new(
            self.dates.clone(),
            columns.iter().map(|&i| self.tickers[i].clone()).collect(),
            self.spins.select(Axis(1), columns),
        )?;
        Ok(sp.with_sector_labels(columns.iter().map(|&i| self.sectors[i]).collect()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for t in &self.tickers {
            out.push(',');
            out.push_str(t);
        }
        out.push('\n');
        for (date, row) in self.dates.iter().zip(self.spins.rows()) {
            out.push_str(&date.format("%Y-%m-%d").to_string());
            for s in row {
                out.push_str(if *s > 0 { ",1" } else { ",-1" });
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        if headers.len() < 2 || &headers[0] != "date" {
            return Err(Error::schema(path, 1, "expected header `date,<ticker>,...`"));
        }
        let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let n = tickers.len();
        let mut dates = Vec::new();
        let mut flat = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| csv_error(path, e))?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            dates.push(
                NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
                    .map_err(|e| Error::schema(path, line, format!("bad date: {e}")))?,
            );
            for field in row.iter().skip(1) {
                flat.push(match field {
                    "1" | "+1" => 1i8,
                    "-1" => -1,
                    other => return Err(Error::schema(path, line, format!("spin must be -1 or 1, got {other:?}"))),
                });
            }
        }
        let spins = Array2::from_shape_vec((dates.len(), n), flat)
            .map_err(|e| Error::schema(path, 0, e.to_string()))?;
        SpinPanel::new(dates, tickers, spins)
    }
}

pub fn default_tickers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i:03}")).collect()
}
