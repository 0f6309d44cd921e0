//! The eleven GICS sectors and the ticker-to-sector table.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    CommunicationServices,
    ConsumerDiscretionary,
    ConsumerStaples,
    Energy,
    Financials,
    HealthCare,
    Industrials,
    InformationTechnology,
    Materials,
    RealEstate,
    Utilities,
    Unknown,
}

impl Sector {
    /// Known sectors in canonical table order (excludes `Unknown`).
    pub const ALL: [Sector; 11] = [
        Sector::CommunicationServices,
        Sector::ConsumerDiscretionary,
        Sector::ConsumerStaples,
        Sector::Energy,
        Sector::Financials,
        Sector::HealthCare,
        Sector::Industrials,
        Sector::InformationTechnology,
        Sector::Materials,
        Sector::RealEstate,
        Sector::Utilities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sector::CommunicationServices => "Communication Services",
            Sector::ConsumerDiscretionary => "Consumer Discretionary",
            Sector::ConsumerStaples => "Consumer Staples",
            Sector::Energy => "Energy",
            Sector::Financials => "Financials",
            Sector::HealthCare => "Health Care",
            Sector::Industrials => "Industrials",
            Sector::InformationTechnology => "Information Technology",
            Sector::Materials => "Materials",
            Sector::RealEstate => "Real Estate",
            Sector::Utilities => "Utilities",
            Sector::Unknown => "unknown",
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            Sector::CommunicationServices => "Comm",
            Sector::ConsumerDiscretionary => "ConsDisc",
            Sector::ConsumerStaples => "Staples",
            Sector::Energy => "Energy",
            Sector::Financials => "Fin",
            Sector::HealthCare => "Health",
            Sector::Industrials => "Ind",
            Sector::InformationTechnology => "IT",
            Sector::Materials => "Mat",
            Sector::RealEstate => "RE",
            Sector::Utilities => "Util",
            Sector::Unknown => "unknown",
        }
    }

    pub fn is_known(self) -> bool {
        self != Sector::Unknown
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sector {
    type Err = Error;

    /// Accepts full names or abbreviations, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unknown") {
            return Ok(Sector::Unknown);
        }
        Sector::ALL
            .into_iter()
            .find(|sec| s.eq_ignore_ascii_case(sec.name()) || s.eq_ignore_ascii_case(sec.abbreviation()))
            .ok_or_else(|| Error::InvalidInput(format!("unrecognized sector label {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SectorTable {
    map: HashMap<String, Sector>,
}

impl SectorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, ticker: impl Into<String>, sector: Sector) {
        self.map.insert(ticker.into(), sector);
    }

    /// Missing tickers map to `Unknown`.
    pub fn get(&self, ticker: &str) -> Sector {
        self.map.get(ticker).copied().unwrap_or(Sector::Unknown)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Reads a `ticker,sector` CSV.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if headers.len() != 2 || &headers[0] != "ticker" || &headers[1] != "sector" {
            return Err(Error::schema(path, 1, "expected header `ticker,sector`"));
        }
        let mut table = SectorTable::new();
        for (k, record) in reader.records().enumerate() {
            let line = k as u64 + 2;
            let record = record.map_err(|e| csv_error(path, e))?;
            let sector = record[1]
                .parse()
                .map_err(|e: Error| Error::schema(path, line, e.to_string()))?;
            table.insert(record[0].to_string(), sector);
        }
        Ok(table)
    }

    pub fn to_csv<'a>(tickers: impl IntoIterator<Item = (&'a str, Sector)>) -> String {
        let mut out = String::from("ticker,sector\n");
        for (t, s) in tickers {
            out.push_str(&format!("{t},{}\n", s.name()));
        }
        out
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::schema(path, line, format!("{other:?}")),
    }
}
