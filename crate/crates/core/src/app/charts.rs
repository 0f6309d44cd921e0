//! SVG charts rendered from the CSV reports alone.
//!
//! Every chart reads one CSV under the output directory. A missing or empty
//! source is skipped and noted in `charts/manifest.csv`; nothing here ever
//! rewrites report data.

use std::fmt::Write as _;
use std::path::Path;

use super::commands::StageReport;
use super::config::{RunConfig, Stage};
use super::outputs::Staged;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy)]
enum XSource {
    /// Row number; used for dated series.
    Index,
    Column(&'static str),
    /// Midpoint of two columns.
    Mid(&'static str, &'static str),
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Line { x: XSource, ys: &'static [&'static str] },
    Scatter { x: &'static str, y: &'static str, identity: bool },
    Histogram { count: &'static str },
}

#[derive(Debug, Clone, Copy)]
struct ChartSpec {
    name: &'static str,
    source: &'static str,
    title: &'static str,
    x_label: &'static str,
    y_label: &'static str,
    kind: Kind,
}

const CHARTS: &[ChartSpec] = &[
    ChartSpec {
        name: "breadth_histogram",
        source: "breadth_histogram.csv",
        title: "Daily market breadth",
        x_label: "breadth",
        y_label: "days",
        kind: Kind::Histogram { count: "count" },
    },
    ChartSpec {
        name: "breadth_series",
        source: "breadth_series.csv",
        title: "Market breadth by day",
        x_label: "day",
        y_label: "breadth",
        kind: Kind::Line { x: XSource::Index, ys: &["breadth"] },
    },
    ChartSpec {
        name: "static_fit_trace",
        source: "static_fit_trace.csv",
        title: "Static fit residuals",
        x_label: "iteration",
        y_label: "residual",
        kind: Kind::Line { x: XSource::Column("iteration"), ys: &["max_abs_residual", "rms_residual"] },
    },
    ChartSpec {
        name: "static_validation",
        source: "analysis/static_validation.csv",
        title: "Static model vs empirical moments",
        x_label: "empirical",
        y_label: "model",
        kind: Kind::Scatter { x: "empirical", y: "model", identity: true },
    },
    ChartSpec {
        name: "breadth_comparison",
        source: "analysis/breadth_comparison.csv",
        title: "Breadth distribution: empirical vs static model",
        x_label: "breadth",
        y_label: "frequency",
        kind: Kind::Line { x: XSource::Mid("bin_lo", "bin_hi"), ys: &["empirical_freq", "model_freq"] },
    },
    ChartSpec {
        name: "static_h_histogram",
        source: "analysis/static_h_histogram.csv",
        title: "Static fields h_i",
        x_label: "h_i",
        y_label: "stocks",
        kind: Kind::Histogram { count: "count" },
    },
    ChartSpec {
        name: "static_j_histogram",
        source: "analysis/static_j_histogram.csv",
        title: "Static couplings J_ij",
        x_label: "J_ij",
        y_label: "pairs",
        kind: Kind::Histogram { count: "count" },
    },
    ChartSpec {
        name: "benchmark_random",
        source: "analysis/benchmark_random.csv",
        title: "Edge-matched random graphs",
        x_label: "average shortest-path length",
        y_label: "average clustering",
        kind: Kind::Scatter { x: "path_length", y: "clustering", identity: false },
    },
    ChartSpec {
        name: "benchmark_watts_strogatz",
        source: "analysis/benchmark_watts_strogatz.csv",
        title: "Watts-Strogatz graphs",
        x_label: "average shortest-path length",
        y_label: "average clustering",
        kind: Kind::Scatter { x: "path_length", y: "clustering", identity: false },
    },
    ChartSpec {
        name: "prominence",
        source: "analysis/prominence.csv",
        title: "Field vs coupling strength",
        x_label: "h_i",
        y_label: "sum_j |J_ij|",
        kind: Kind::Scatter { x: "h", y: "strength", identity: false },
    },
    ChartSpec {
        name: "market_field",
        source: "analysis/market_fit.csv",
        title: "Market-average fields",
        x_label: "transition",
        y_label: "field",
        kind: Kind::Line { x: XSource::Index, ys: &["h_bar", "theta_bar"] },
    },
    ChartSpec {
        name: "market_fit",
        source: "analysis/market_fit.csv",
        title: "Predicted vs empirical market mean",
        x_label: "transition",
        y_label: "market mean",
        kind: Kind::Line { x: XSource::Index, ys: &["empirical", "predicted"] },
    },
    ChartSpec {
        name: "field_decomposition",
        source: "analysis/field_decomposition.csv",
        title: "Mean local-field components",
        x_label: "transition",
        y_label: "field",
        kind: Kind::Line { x: XSource::Index, ys: &["external", "self", "interaction"] },
    },
    ChartSpec {
        name: "calibration",
        source: "analysis/calibration.csv",
        title: "Calibration of P(up)",
        x_label: "predicted probability",
        y_label: "empirical frequency",
        kind: Kind::Scatter { x: "", y: "empirical_freq", identity: true },
    },
    ChartSpec {
        name: "lag1_comparison",
        source: "analysis/lag1_comparison.csv",
        title: "Lag-1 cross correlations",
        x_label: "empirical",
        y_label: "model",
        kind: Kind::Scatter { x: "empirical", y: "model", identity: true },
    },
    ChartSpec {
        name: "kinetic_a_histogram",
        source: "analysis/kinetic_a_histogram.csv",
        title: "Self-memory a_i",
        x_label: "a_i",
        y_label: "stocks",
        kind: Kind::Histogram { count: "count" },
    },
    ChartSpec {
        name: "kinetic_j_histogram",
        source: "analysis/kinetic_j_histogram.csv",
        title: "Directed couplings J_ij",
        x_label: "J_ij",
        y_label: "ordered pairs",
        kind: Kind::Histogram { count: "count" },
    },
    ChartSpec {
        name: "strength_comparison",
        source: "analysis/strength_comparison.csv",
        title: "Static vs kinetic coupling strength",
        x_label: "static strength",
        y_label: "kinetic total strength",
        kind: Kind::Scatter { x: "static_strength", y: "kinetic_total", identity: false },
    },
];

pub fn cmd_charts(cfg: &RunConfig) -> Result<StageReport> {
    let root = &cfg.run.out;
    if !root.is_dir() {
        return Err(Error::Config(format!("output directory {} does not exist", root.display())));
    }
    let mut out = Staged::new();
    let mut manifest = String::from("chart,source,status,note\n");
    for chart in CHARTS {
        let (status, note) = match render(root, chart)? {
            Ok(svg) => {
                out.add(format!("charts/{}.svg", chart.name), svg);
                ("written", String::new())
            }
            Err(reason) => {
                log::info!("chart {} skipped: {reason}", chart.name);
                ("skipped", reason)
            }
        };
        let _ = writeln!(manifest, "{},{},{status},{note}", chart.name, chart.source);
    }
    out.add("charts/manifest.csv", manifest);
    let files = out.commit(root)?;
    Ok(StageReport { stage: Stage::Charts, files })
}

/// Outer error: unreadable file. Inner error: reason to skip the chart.
fn render(root: &Path, chart: &ChartSpec) -> Result<std::result::Result<String, String>> {
    let path = root.join(chart.source);
    if !path.is_file() {
        return Ok(Err("source not found".into()));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table = match Table::parse(&text) {
        Some(t) if !t.rows.is_empty() => t,
        _ => return Ok(Err("source has no data rows".into())),
    };
    Ok(match chart.kind {
        Kind::Line { x, ys } => {
            let series: Vec<(&str, Vec<(f64, f64)>)> = ys
                .iter()
                .filter_map(|&y| {
                    let pts = table.points(x, y)?;
                    Some((y, pts))
                })
                .filter(|(_, pts)| !pts.is_empty())
                .collect();
            if series.is_empty() {
                Err("no numeric series".into())
            } else {
                Ok(line_chart(chart, &series))
            }
        }
        Kind::Scatter { x, y, identity } => {
            let xs = if x.is_empty() { XSource::Mid("bin_lo", "bin_hi") } else { XSource::Column(x) };
            match table.points(xs, y) {
                Some(pts) if !pts.is_empty() => Ok(scatter_chart(chart, &pts, identity)),
                _ => Err("no numeric points".into()),
            }
        }
        Kind::Histogram { count } => match (table.column("bin_lo"), table.column("bin_hi"), table.column(count)) {
            (Some(lo), Some(hi), Some(c)) => {
                let bars: Vec<(f64, f64, f64)> = (0..table.rows.len())
                    .filter_map(|r| Some((table.num(r, lo)?, table.num(r, hi)?, table.num(r, c)?)))
                    .collect();
                if bars.is_empty() {
                    Err("no numeric bins".into())
                } else {
                    Ok(histogram_chart(chart, &bars))
                }
            }
            _ => Err("missing bin columns".into()),
        },
    })
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Option<Self> {
        let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
        let header = rd.headers().ok()?.iter().map(str::to_string).collect();
        let rows = rd
            .records()
            .filter_map(|r| r.ok())
            .map(|r| r.iter().map(str::to_string).collect())
            .collect();
        Some(Table { header, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn num(&self, row: usize, col: usize) -> Option<f64> {
        self.rows[row].get(col)?.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn points(&self, x: XSource, y: &str) -> Option<Vec<(f64, f64)>> {
        let yc = self.column(y)?;
        let xv: Box<dyn Fn(usize) -> Option<f64>> = match x {
            XSource::Index => Box::new(|r| Some(r as f64)),
            XSource::Column(c) => {
                let c = self.column(c)?;
                Box::new(move |r| self.num(r, c))
            }
            XSource::Mid(a, b) => {
                let (a, b) = (self.column(a)?, self.column(b)?);
                Box::new(move |r| Some(0.5 * (self.num(r, a)? + self.num(r, b)?)))
            }
        };
        Some((0..self.rows.len()).filter_map(|r| Some((xv(r)?, self.num(r, yc)?))).collect())
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = span(xs);
        let (y0, y1) = span(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn span(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn open_svg(chart: &ChartSpec, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(chart.title)
    );
    let (left, right, top, bottom) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        right - left,
        bottom - top
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="#444"/>"##, bottom + 4.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 16.0, tick(xv));
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="#444"/>"##, left - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 12.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(chart.y_label)
    );
    s
}

fn legend(s: &mut String, entries: &[(String, &str)]) {
    for (k, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 14.0 * k as f64;
        let x = WIDTH - MARGIN_R - 150.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{:.2}" width="10" height="10" fill="{color}"/>"#, y - 9.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 14.0, escape(label));
    }
}

fn line_chart(chart: &ChartSpec, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let f = Frame::fit(all.clone().map(|p| p.0), all.map(|p| p.1));
    let mut s = open_svg(chart, &f);
    let mut entries = Vec::new();
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, f.px(x), f.py(y));
        }
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#);
        entries.push((name.to_string(), color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

fn scatter_chart(chart: &ChartSpec, pts: &[(f64, f64)], identity: bool) -> String {
    let mut f = Frame::fit(pts.iter().map(|p| p.0), pts.iter().map(|p| p.1));
    if identity {
        // Square frame so the guide line sits on the diagonal.
        let (lo, hi) = (f.x0.min(f.y0), f.x1.max(f.y1));
        f = Frame { x0: lo, x1: hi, y0: lo, y1: hi };
    }
    let mut s = open_svg(chart, &f);
    if identity {
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="5,4"/>"##,
            f.px(f.x0),
            f.py(f.y0),
            f.px(f.x1),
            f.py(f.y1)
        );
    }
    for &(x, y) in pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.6"/>"#,
            f.px(x),
            f.py(y),
            PALETTE[0]
        );
    }
    let mut entries = vec![(format!("points = {}", pts.len()), PALETTE[0])];
    if identity {
        entries.push(("identity".into(), "#888"));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

fn histogram_chart(chart: &ChartSpec, bars: &[(f64, f64, f64)]) -> String {
    let xs = bars.iter().flat_map(|b| [b.0, b.1]);
    let f = Frame::fit(xs, bars.iter().map(|b| b.2).chain([0.0]));
    let f = Frame { y0: 0.0, ..f };
    let mut s = open_svg(chart, &f);
    for &(lo, hi, c) in bars {
        let (x0, x1, y) = (f.px(lo), f.px(hi), f.py(c));
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white" stroke-width="0.5"/>"##,
            (x1 - x0).max(0.0),
            (f.py(0.0) - y).max(0.0),
            PALETTE[0]
        );
    }
    let total: f64 = bars.iter().map(|b| b.2).sum();
    let label = if chart.name == "breadth_histogram" {
        format!("T = {total}")
    } else {
        format!("total = {total}")
    };
    legend(&mut s, &[(label, PALETTE[0])]);
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_at(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.run.out = dir.to_path_buf();
        cfg
    }

    #[test]
    fn calibration_scatter_has_identity_line() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("analysis")).unwrap();
        std::fs::write(
            dir.path().join("analysis/calibration.csv"),
            "bin_lo,bin_hi,count,empirical_freq\n0.1,0.2,10,0.15\n0.2,0.3,0,\n0.5,0.6,40,0.55\n",
        )
        .unwrap();
        cmd_charts(&cfg_at(dir.path())).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("charts/calibration.svg")).unwrap();
        assert!(svg.contains("stroke-dasharray"));
        // The empty bin is not plotted.
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("points = 2"));
    }

    #[test]
    fn missing_or_empty_sources_are_noted() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("analysis")).unwrap();
        std::fs::write(dir.path().join("analysis/prominence.csv"), "ticker,h,strength,radius,selected\n").unwrap();
        cmd_charts(&cfg_at(dir.path())).unwrap();
        let manifest = std::fs::read_to_string(dir.path().join("charts/manifest.csv")).unwrap();
        assert!(manifest.contains("prominence,analysis/prominence.csv,skipped,source has no data rows"));
        assert!(manifest.contains("calibration,analysis/calibration.csv,skipped,source not found"));
        assert!(!dir.path().join("charts/prominence.svg").exists());
    }

    #[test]
    fn breadth_histogram_legend_conserves_day_count() {
        let dir = tempfile::tempdir().unwrap();
        let csv = "bin_lo,bin_hi,count\n-1,-0.5,3\n-0.5,0,7\n0,0.5,11\n0.5,1,4\n";
        std::fs::write(dir.path().join("breadth_histogram.csv"), csv).unwrap();
        cmd_charts(&cfg_at(dir.path())).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("charts/breadth_histogram.svg")).unwrap();
        assert!(svg.contains("T = 25"));
        assert_eq!(svg.matches("<rect x=").count(), 4 + 1 + 1);
        // Charting leaves the source untouched.
        assert_eq!(std::fs::read_to_string(dir.path().join("breadth_histogram.csv")).unwrap(), csv);
    }
}
