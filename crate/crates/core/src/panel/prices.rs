use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::sector::{csv_error, Sector, SectorTable};

/// Where to read prices from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriceSource {
    /// One CSV with header `date,ticker,open,close`.
    Long(PathBuf),
    /// Two CSVs whose first column is `date` and remaining columns are tickers.
    Wide { open: PathBuf, close: PathBuf },
}

/// Daily open/close prices on a date × ticker grid. `None` marks a missing
/// or unusable price.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    pub sectors: Vec<Sector>,
    pub open: Array2<Option<f64>>,
    pub close: Array2<Option<f64>>,
}

impl PricePanel {
    pub fn new(
        dates: Vec<NaiveDate>,
        tickers: Vec<String>,
        open: Array2<Option<f64>>,
        close: Array2<Option<f64>>,
    ) -> Result<Self> {
        let shape = (dates.len(), tickers.len());
        if open.dim() != shape || close.dim() != shape {
            return Err(Error::InvalidInput(format!(
                "price matrices {:?}/{:?} do not match ({} dates, {} tickers)",
                open.dim(),
                close.dim(),
                shape.0,
                shape.1
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("dates must be strictly increasing".into()));
        }
        if open.iter().chain(close.iter()).flatten().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidInput("prices must be positive and finite".into()));
        }
        let sectors = vec![Sector::Unknown; tickers.len()];
        Ok(PricePanel {
            dates,
            tickers,
            sectors,
            open,
            close,
        })
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn with_sectors(mut self, table: &SectorTable) -> Self {
        self.sectors = self.tickers.iter().map(|t| table.get(t)).collect();
        self
    }

    pub fn missing_open(&self) -> usize {
        self.open.iter().filter(|p| p.is_none()).count()
    }

    pub fn missing_close(&self) -> usize {
        self.close.iter().filter(|p| p.is_none()).count()
    }
}

pub fn load_prices(source: &PriceSource) -> Result<PricePanel> {
    match source {
        PriceSource::Long(path) => load_long(path),
        PriceSource::Wide { open, close } => load_wide(open, close),
    }
}

fn parse_price(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|p| *p > 0.0 && p.is_finite())
}

fn parse_date(path: &Path, line: u64, field: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d")
        .map_err(|e| Error::schema(path, line, format!("bad date {field:?}: {e}")))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

type Cell = (Option<f64>, Option<f64>);

fn assemble(records: HashMap<(NaiveDate, String), Cell>) -> Result<PricePanel> {
    let dates: Vec<NaiveDate> = records.keys().map(|(d, _)| *d).collect::<BTreeSet<_>>().into_iter().collect();
    let tickers: Vec<String> = records
        .keys()
        .map(|(_, t)| t.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let date_idx: HashMap<NaiveDate, usize> = dates.iter().enumerate().map(|(k, d)| (*d, k)).collect();
    let ticker_idx: HashMap<&str, usize> = tickers.iter().enumerate().map(|(k, t)| (t.as_str(), k)).collect();
    let mut open = Array2::from_elem((dates.len(), tickers.len()), None);
    let mut close = Array2::from_elem((dates.len(), tickers.len()), None);
    for ((d, t), (o, c)) in &records {
        let cell = (date_idx[d], ticker_idx[t.as_str()]);
        open[cell] = *o;
        close[cell] = *c;
    }
    PricePanel::new(dates, tickers, open, close)
}

fn load_long(path: &Path) -> Result<PricePanel> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected = ["date", "ticker", "open", "close"];
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::schema(path, 1, "expected header `date,ticker,open,close`"));
    }
    let mut records = HashMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(path, line, &row[0])?;
        let ticker = row[1].to_string();
        if ticker.is_empty() {
            return Err(Error::schema(path, line, "empty ticker"));
        }
        let cell = (parse_price(&row[2]), parse_price(&row[3]));
        if records.insert((date, ticker.clone()), cell).is_some() {
            return Err(Error::DuplicateRecord {
                path: path.to_path_buf(),
                line,
                date: date.to_string(),
                ticker,
            });
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyPanel(format!("{} has no records", path.display())));
    }
    assemble(records)
}

type WideTable = (Vec<String>, HashMap<NaiveDate, Vec<Option<f64>>>);

fn read_wide(path: &Path) -> Result<WideTable> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < 2 || &headers[0] != "date" {
        return Err(Error::schema(path, 1, "expected header `date,<ticker>,...`"));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if tickers.iter().collect::<BTreeSet<_>>().len() != tickers.len() {
        return Err(Error::schema(path, 1, "duplicate ticker column"));
    }
    let mut rows = HashMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(path, line, &row[0])?;
        let values = row.iter().skip(1).map(parse_price).collect();
        if rows.insert(date, values).is_some() {
            return Err(Error::DuplicateRecord {
                path: path.to_path_buf(),
                line,
                date: date.to_string(),
                ticker: "*".into(),
            });
        }
    }
    Ok((tickers, rows))
}

fn load_wide(open_path: &Path, close_path: &Path) -> Result<PricePanel> {
    let (open_tickers, open_rows) = read_wide(open_path)?;
    let (close_tickers, close_rows) = read_wide(close_path)?;
    let open_set: BTreeSet<_> = open_tickers.iter().collect();
    if open_set != close_tickers.iter().collect::<BTreeSet<_>>() {
        return Err(Error::schema(close_path, 1, "ticker columns differ from the open-price file"));
    }
    let close_col: HashMap<&str, usize> = close_tickers.iter().enumerate().map(|(k, t)| (t.as_str(), k)).collect();
    let dates: BTreeSet<NaiveDate> = open_rows.keys().chain(close_rows.keys()).copied().collect();
    let mut records = HashMap::new();
    for date in dates {
        for (k, ticker) in open_tickers.iter().enumerate() {
            let o = open_rows.get(&date).and_then(|r| r[k]);
            let c = close_rows.get(&date).and_then(|r| r[close_col[ticker.as_str()]]);
            records.insert((date, ticker.clone()), (o, c));
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyPanel(format!("{} has no records", open_path.display())));
    }
    assemble(records)
}
