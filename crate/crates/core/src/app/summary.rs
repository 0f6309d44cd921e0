//! Row-structured summary of the network and kinetic diagnostics.

use serde::{Deserialize, Serialize};

pub const NA: &str = "n/a";

pub const STATIC_TABLE: &str = "static_network";
pub const KINETIC_TABLE: &str = "kinetic";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub table: String,
    pub section: String,
    pub row: String,
    /// Position within a ranked list, starting at 1.
    pub rank: Option<usize>,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[SummaryRow] {
        &self.rows
    }

    pub fn push(&mut self, table: &str, section: &str, row: &str, value: impl Into<String>) {
        self.rows.push(SummaryRow {
            table: table.into(),
            section: section.into(),
            row: row.into(),
            rank: None,
            value: value.into(),
        });
    }

    /// Adds exactly `k` ranked rows, padding with "n/a".
    pub fn push_ranked(&mut self, table: &str, section: &str, row: &str, items: &[String], k: usize) {
        for r in 0..k {
            self.rows.push(SummaryRow {
                table: table.into(),
                section: section.into(),
                row: row.into(),
                rank: Some(r + 1),
                value: items.get(r).cloned().unwrap_or_else(|| NA.into()),
            });
        }
    }

    /// First value recorded under `row`.
    pub fn get(&self, row: &str) -> Option<&str> {
        self.rows.iter().find(|r| r.row == row).map(|r| r.value.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["table", "section", "row", "rank", "value"]).expect("in-memory write");
        for r in &self.rows {
            let rank = r.rank.map(|k| k.to_string()).unwrap_or_default();
            w.write_record([&r.table, &r.section, &r.row, &rank, &r.value])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn from_csv(text: &str) -> crate::Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| crate::Error::InvalidInput(format!("summary: {e}")))?;
            let field = |i: usize| rec.get(i).unwrap_or_default().to_string();
            rows.push(SummaryRow {
                table: field(0),
                section: field(1),
                row: field(2),
                rank: rec.get(3).and_then(|s| s.parse().ok()),
                value: field(4),
            });
        }
        Ok(Summary { rows })
    }
}

/// Five decimals, or "n/a" for a missing or non-finite value.
pub fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => {
            let s = format!("{v:.5}");
            // Avoid "-0.00000".
            if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                s.trim_start_matches('-').to_string()
            } else {
                s
            }
        }
        _ => NA.into(),
    }
}

pub fn pair(a: String, b: String) -> String {
    if a == NA && b == NA {
        NA.into()
    } else {
        format!("{a} / {b}")
    }
}

pub fn labelled(label: &str, v: f64) -> String {
    format!("{label} ({})", num(Some(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranked_rows_are_padded() {
        let mut s = Summary::new();
        s.push_ranked(STATIC_TABLE, "S", "Top", &["a (1.00000)".into()], 3);
        assert_eq!(s.rows().len(), 3);
        assert_eq!(s.rows()[2].value, NA);
        assert_eq!(s.rows()[2].rank, Some(3));
    }

    #[test]
    fn csv_round_trip_quotes_commas() {
        let mut s = Summary::new();
        s.push(KINETIC_TABLE, "Windows", "Full sample", "0.1, -0.2, 0.3");
        s.push(KINETIC_TABLE, "Windows", "x", NA);
        let back = Summary::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.get("Full sample"), Some("0.1, -0.2, 0.3"));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(num(Some(-0.000001)), "0.00000");
        assert_eq!(num(Some(1.4242)), "1.42420");
        assert_eq!(num(Some(f64::NAN)), NA);
        assert_eq!(num(None), NA);
        assert_eq!(pair(NA.into(), NA.into()), NA);
    }
}
