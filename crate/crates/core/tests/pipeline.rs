//! Subcommand behaviour on the bundled fixture and on hand-built toy runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use market_ising::app::{self, RunConfig, Stage, Summary};
use market_ising::kinetic::{HatBasis, KineticIsingModel, KineticModelDocument, PenaltyConfig};
use market_ising::panel::SpinPanel;
use market_ising::static_model::{StaticIsingModel, StaticModelDocument};
use market_ising::{Sector, SectorTable};
use ndarray::{array, Array1, Array2};

fn fixture_config(out: &Path) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/run.toml");
    let mut cfg = RunConfig::load(&path).unwrap();
    cfg.run.out = out.to_path_buf();
    cfg
}

fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

#[test]
fn ingest_reports_the_gapped_ticker() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    app::cmd_ingest(&cfg).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(app::INGEST_REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(report["dropped_tickers"], serde_json::json!(["GAPY"]));
    assert_eq!((report["days"].as_u64(), report["tickers"].as_u64()), (Some(2000), Some(12)));
    let hist = std::fs::read_to_string(dir.path().join("breadth_histogram.csv")).unwrap();
    let total: u64 = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 2000);
    let panel = SpinPanel::load_csv(&dir.path().join(app::PANEL_FILE)).unwrap();
    assert_eq!((panel.n_days(), panel.n_stocks()), (2000, 12));
}

#[test]
fn stages_are_idempotent_and_worker_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg_a = fixture_config(a.path());
    let mut cfg_b = fixture_config(b.path());
    cfg_b.run.workers = 3;
    app::with_workers(1, || app::run_pipeline(&cfg_a)).unwrap().unwrap();
    app::with_workers(3, || app::run_pipeline(&cfg_b)).unwrap().unwrap();
    let first = snapshot(a.path());
    assert_eq!(first, snapshot(b.path()));
    // Rerunning a single stage over existing outputs reproduces them.
    app::cmd_fit_static(&cfg_a).unwrap();
    app::cmd_analyze(&cfg_a).unwrap();
    assert_eq!(first, snapshot(a.path()));
}

#[test]
fn kinetic_basis_larger_than_panel_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config(dir.path());
    app::cmd_ingest(&cfg).unwrap();
    cfg.kinetic_fit.n_basis = 1999;
    let err = app::cmd_fit_kinetic(&cfg).unwrap_err();
    assert_eq!(app::exit_code(&err), 2);
    assert!(!dir.path().join(app::KINETIC_MODEL_FILE).exists());
}

#[test]
fn binary_exit_codes_and_no_partial_output() {
    let exe = env!("CARGO_BIN_EXE_market-ising");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = Command::new(exe)
        .args(["fit-static", "--out", out.to_str().unwrap()])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[input]\nprices = \"missing.csv\"\n").unwrap();
    let status = Command::new(exe)
        .args(["validate-config", "--config", bad.to_str().unwrap()])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let cfg = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/run.toml");
    let status = Command::new(exe)
        .args(["validate-config", "--config", cfg.to_str().unwrap()])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // A file where the output directory should be: an I/O failure.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let status = Command::new(exe)
        .args(["ingest", "--config", cfg.to_str().unwrap(), "--out", blocker.to_str().unwrap()])
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

/// Writes a toy run directory: panel, sectors and both model documents.
fn toy_run(dir: &Path, j_static: Array2<f64>, j_kinetic: Array2<f64>, sectors: &[Sector]) -> RunConfig {
    let n = sectors.len();
    let t = 80;
    let spins = Array2::from_shape_fn((t, n), |(r, c)| if (r * 7 + c * 3 + r / 5) % 3 == 0 { 1 } else { -1 });
    let panel = SpinPanel::synthetic(spins).unwrap();
    let tickers = panel.tickers().to_vec();
    panel.save_csv(&dir.join(app::PANEL_FILE)).unwrap();
    std::fs::write(
        dir.join(app::PANEL_SECTORS_FILE),
        SectorTable::to_csv(tickers.iter().map(String::as_str).zip(sectors.iter().copied())),
    )
    .unwrap();
    let sm = StaticIsingModel::new(Array1::from_elem(n, 0.05), j_static)
        .unwrap()
        .with_tickers(tickers.clone())
        .unwrap();
    std::fs::write(dir.join(app::STATIC_MODEL_FILE), StaticModelDocument::from_model(&sm, None).to_json()).unwrap();
    let basis = HatBasis::new(3, t).unwrap();
    let km = KineticIsingModel::new(Array2::from_elem((n, 3), 0.02), Array1::from_elem(n, 0.1), j_kinetic, basis)
        .unwrap()
        .with_tickers(tickers)
        .unwrap();
    std::fs::write(
        dir.join(app::KINETIC_MODEL_FILE),
        KineticModelDocument::from_model(&km, PenaltyConfig::none(), None).to_json(),
    )
    .unwrap();
    let mut cfg = RunConfig::default();
    cfg.run.out = dir.to_path_buf();
    cfg.static_fit.gibbs.n_samples = 500;
    cfg.analysis.benchmark_realizations = 5;
    cfg.analysis.watts_strogatz_realizations = 5;
    cfg
}

fn summary(dir: &Path) -> Summary {
    Summary::from_csv(&std::fs::read_to_string(dir.join(app::SUMMARY_FILE)).unwrap()).unwrap()
}

#[test]
fn symmetric_kinetic_couplings_have_zero_asymmetry() {
    let dir = tempfile::tempdir().unwrap();
    let j = array![[0.0, 0.2, -0.1], [0.2, 0.0, 0.3], [-0.1, 0.3, 0.0]];
    let cfg = toy_run(dir.path(), j.clone(), j, &[Sector::Energy; 3]);
    app::cmd_analyze(&cfg).unwrap();
    assert_eq!(summary(dir.path()).get("Frobenius asymmetry index"), Some("0.00000"));
}

#[test]
fn block_couplings_give_hand_computed_sector_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let sectors = [Sector::Energy, Sector::Energy, Sector::Financials, Sector::Financials, Sector::Utilities];
    let j = Array2::from_shape_fn((5, 5), |(a, b)| {
        if a == b {
            0.0
        } else if sectors[a] == sectors[b] {
            0.3
        } else {
            -0.1
        }
    });
    let cfg = toy_run(dir.path(), j.clone(), j, &sectors);
    app::cmd_analyze(&cfg).unwrap();
    let s = summary(dir.path());
    // Within pairs: 0.3 each; between: |-0.1| each. Utilities has no within pair.
    assert_eq!(
        s.get("Within-sector mean |J_ij| / between-sector mean |J_ij|"),
        Some("0.30000 / 0.10000")
    );
    assert_eq!(s.get("Within/between ratio"), Some("3.00000"));
    assert_eq!(s.get("Static within/between ratio"), Some("3.00000"));
    let within: Vec<&str> = s
        .rows()
        .iter()
        .filter(|r| r.row == "Largest within-sector mean |J_ij|")
        .map(|r| r.value.as_str())
        .collect();
    assert_eq!(within, ["Energy (0.30000)", "Financials (0.30000)", "n/a", "n/a", "n/a"]);
}

#[test]
fn analyze_without_models_reports_na() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config(dir.path());
    cfg.run.stages = vec![Stage::Ingest, Stage::Analyze, Stage::Charts];
    app::run_pipeline(&cfg).unwrap();
    let s = summary(dir.path());
    assert_eq!(s.get("Small-world coefficient sigma"), Some("n/a"));
    assert_eq!(s.get("Frobenius asymmetry index"), Some("n/a"));
    assert_eq!(s.get("Number of stocks / unique pairwise couplings"), Some("12 / 66"));
    let manifest = std::fs::read_to_string(dir.path().join("charts/manifest.csv")).unwrap();
    assert!(manifest.contains("calibration,analysis/calibration.csv,skipped,source not found"));
    assert!(manifest.contains("breadth_histogram,breadth_histogram.csv,written,"));
}
