use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use super::config::{PriceFormat, RunConfig, Stage};
use super::outputs::Staged;
use super::summary::{labelled, num, pair, Summary, KINETIC_TABLE, NA, STATIC_TABLE};
use crate::error::{Error, Result};
use crate::kinetic::{
    calibration_table, field_decomposition, fit_kinetic, market_fit_report, model_lag1_correlations,
    self_memory_summary, KineticFitMeta, KineticIsingModel, KineticModelDocument, StockFitTrace,
};
use crate::network::{
    asymmetry_index, average_shortest_path, backbone, clustering_coefficient, connected_components,
    coupling_summary, filter_top_fraction, parameter_histograms, prominence_select, sector_assortativity,
    sector_matrices, sector_network_summary, small_world_sigma, static_vs_kinetic_strength,
    symmetry_correlations, watts_strogatz_benchmark, NodeAttributes, SectorMatrix, SectorMode,
};
use crate::panel::{
    binarize, breadth_histogram, breadth_series, empirical_moments, filter_complete, lag1_cross_correlation,
    load_prices, PriceSource, SpinPanel,
};
use crate::rng::derive_seed;
use crate::sector::SectorTable;
use crate::static_model::{
    fit_static, model_breadth_distribution, validate_static, MomentEstimator, StaticFitMeta, StaticIsingModel,
    StaticModelDocument, ORACLE_LIMIT,
};
use crate::stats::{Correlation, Histogram};

pub const PANEL_FILE: &str = "panel.csv";
pub const PANEL_SECTORS_FILE: &str = "panel_sectors.csv";
pub const INGEST_REPORT_FILE: &str = "ingest_report.json";
pub const STATIC_MODEL_FILE: &str = "static_model.json";
pub const KINETIC_MODEL_FILE: &str = "kinetic_model.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const INGEST_SCHEMA_VERSION: u32 = 1;

/// Seed streams derived from `run.seed`.
const VALIDATION_STREAM: u64 = 1;
const BENCHMARK_STREAM: u64 = 2;
const BREADTH_STREAM: u64 = 3;

/// Files a stage wrote, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: Stage,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub schema_version: u32,
    pub days: usize,
    pub tickers: usize,
    pub input_days: usize,
    pub input_tickers: usize,
    pub dropped_tickers: Vec<String>,
    pub dropped_days: usize,
    pub missing_open: usize,
    pub missing_close: usize,
    pub tickers_with_sector: usize,
    pub completeness: crate::panel::CompletenessRule,
    pub breadth_bins: usize,
}

pub fn run_stage(cfg: &RunConfig, stage: Stage) -> Result<StageReport> {
    match stage {
        Stage::Ingest => cmd_ingest(cfg),
        Stage::FitStatic => cmd_fit_static(cfg),
        Stage::FitKinetic => cmd_fit_kinetic(cfg),
        Stage::Analyze => cmd_analyze(cfg),
        Stage::Charts => super::charts::cmd_charts(cfg),
    }
}

/// Runs `run.stages` in order, stopping at the first failure.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<StageReport>> {
    cfg.validate()?;
    if cfg.run.stages.contains(&Stage::Ingest) {
        cfg.validate_inputs()?;
    }
    let mut reports = Vec::with_capacity(cfg.run.stages.len());
    for &stage in &cfg.run.stages {
        log::info!("stage {}", stage.name());
        reports.push(run_stage(cfg, stage)?);
    }
    Ok(reports)
}

/// Validates ranges and, when the stage list includes ingest, input paths.
pub fn cmd_validate_config(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    if cfg.run.stages.contains(&Stage::Ingest) {
        cfg.validate_inputs()?;
    }
    let stages: Vec<&str> = cfg.run.stages.iter().map(|s| s.name()).collect();
    Ok(format!(
        "configuration ok: stages [{}], output {}",
        stages.join(", "),
        cfg.run.out.display()
    ))
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<StageReport> {
    cfg.validate()?;
    cfg.validate_inputs()?;
    let source = match cfg.input.format {
        PriceFormat::Long => PriceSource::Long(cfg.input.prices.clone().expect("validated")),
        PriceFormat::Wide => PriceSource::Wide {
            open: cfg.input.open.clone().expect("validated"),
            close: cfg.input.close.clone().expect("validated"),
        },
    };
    let mut prices = load_prices(&source)?;
    if let Some(path) = &cfg.input.sectors {
        prices = prices.with_sectors(&SectorTable::load(path)?);
    }
    let (panel, filter) = filter_complete(&binarize(&prices), cfg.input.completeness)?;
    let bins = cfg.analysis.breadth_bins;
    let report = IngestReport {
        schema_version: INGEST_SCHEMA_VERSION,
        days: filter.days,
        tickers: filter.tickers,
        input_days: filter.input_days,
        input_tickers: filter.input_tickers,
        dropped_tickers: filter.dropped_tickers,
        dropped_days: filter.dropped_days,
        missing_open: prices.missing_open(),
        missing_close: prices.missing_close(),
        tickers_with_sector: panel.sectors().iter().filter(|s| s.is_known()).count(),
        completeness: cfg.input.completeness,
        breadth_bins: bins,
    };
    log::info!("panel {} days x {} tickers", report.days, report.tickers);

    let mut out = Staged::new();
    out.add(PANEL_FILE, panel.to_csv());
    out.add(
        PANEL_SECTORS_FILE,
        SectorTable::to_csv(panel.tickers().iter().map(String::as_str).zip(panel.sectors().iter().copied())),
    );
    out.add(INGEST_REPORT_FILE, json(&report));
    out.add("breadth_histogram.csv", breadth_histogram(&panel, bins).to_csv());
    let mut series = String::from("date,breadth\n");
    for (d, b) in panel.dates().iter().zip(breadth_series(&panel)) {
        series.push_str(&format!("{d},{b}\n"));
    }
    out.add("breadth_series.csv", series);
    finish(Stage::Ingest, out, &cfg.run.out)
}

pub fn cmd_fit_static(cfg: &RunConfig) -> Result<StageReport> {
    cfg.validate()?;
    let panel = load_panel(&cfg.run.out)?;
    let mut fit_cfg = cfg.static_fit.clone();
    fit_cfg.gibbs.seed = cfg.run.seed;
    let (model, trace) = fit_static(&empirical_moments(&panel), &fit_cfg)?;
    let model = model.with_tickers(panel.tickers().to_vec())?;
    if !trace.converged {
        log::warn!("static fit stopped after {} iterations without meeting the tolerance", trace.rows.len());
    }
    let doc = StaticModelDocument::from_model(&model, Some(StaticFitMeta::new(&fit_cfg, &trace)));
    let mut out = Staged::new();
    out.add(STATIC_MODEL_FILE, doc.to_json());
    out.add("static_fit_trace.csv", trace.to_csv());
    finish(Stage::FitStatic, out, &cfg.run.out)
}

pub fn cmd_fit_kinetic(cfg: &RunConfig) -> Result<StageReport> {
    cfg.validate()?;
    let panel = load_panel(&cfg.run.out)?;
    cfg.kinetic_fit.validate_for(panel.n_days())?;
    let (model, traces) = fit_kinetic(&panel, &cfg.kinetic_fit)?;
    let meta = KineticFitMeta::new(&cfg.kinetic_fit, &traces);
    let doc = KineticModelDocument::from_model(&model, cfg.kinetic_fit.penalties, Some(meta));
    let mut out = Staged::new();
    out.add(KINETIC_MODEL_FILE, doc.to_json());
    out.add("kinetic_fit_trace.csv", StockFitTrace::to_csv(&traces));
    finish(Stage::FitKinetic, out, &cfg.run.out)
}

/// Diagnostics for whichever fitted models are present in the output
/// directory. Rows whose inputs are missing are reported as "n/a".
pub fn cmd_analyze(cfg: &RunConfig) -> Result<StageReport> {
    cfg.validate()?;
    let root = &cfg.run.out;
    let panel = load_panel(root)?;
    let static_model = load_optional(&root.join(STATIC_MODEL_FILE), |p| StaticModelDocument::load(p)?.to_model())?;
    let kinetic_model = load_optional(&root.join(KINETIC_MODEL_FILE), |p| KineticModelDocument::load(p)?.to_model())?;
    for tickers in [static_model.as_ref().map(|m| m.tickers()), kinetic_model.as_ref().map(|m| m.tickers())]
        .into_iter()
        .flatten()
    {
        if tickers != panel.tickers() {
            return Err(Error::InvalidInput(
                "fitted model tickers differ from the panel; rerun the fit stages".into(),
            ));
        }
    }
    if static_model.is_none() && kinetic_model.is_none() {
        log::warn!("no fitted models found in {}; summary will be mostly n/a", root.display());
    }

    let mut out = Staged::new();
    let mut summary = Summary::new();
    let static_sectors = match &static_model {
        Some(m) => Some(analyze_static(cfg, &panel, m, &mut out, &mut summary)?),
        None => {
            static_placeholder(cfg, &panel, &mut summary);
            None
        }
    };
    match &kinetic_model {
        Some(m) => analyze_kinetic(cfg, &panel, m, static_model.as_ref(), static_sectors.as_ref(), &mut out, &mut summary)?,
        None => kinetic_placeholder(cfg, &panel, static_sectors.as_ref(), &mut summary),
    }
    out.add(SUMMARY_FILE, summary.to_csv());
    finish(Stage::Analyze, out, root)
}

fn analyze_static(
    cfg: &RunConfig,
    panel: &SpinPanel,
    model: &StaticIsingModel,
    out: &mut Staged,
    s: &mut Summary,
) -> Result<SectorMatrix> {
    let a = &cfg.analysis;
    let n = model.n();
    let seed = cfg.run.seed;
    let sectors = panel.sectors();

    let mut gibbs = cfg.static_fit.gibbs.clone();
    gibbs.seed = derive_seed(seed, VALIDATION_STREAM);
    let estimator = if a.exact_validation && n <= ORACLE_LIMIT {
        MomentEstimator::Exact
    } else {
        MomentEstimator::Gibbs(gibbs.clone())
    };
    let validation = validate_static(model, panel, &estimator)?;
    out.add("analysis/static_validation.csv", validation.to_csv(panel.tickers()));

    gibbs.seed = derive_seed(seed, BREADTH_STREAM);
    let model_breadth = model_breadth_distribution(model, &gibbs, a.breadth_bins)?;
    out.add(
        "analysis/breadth_comparison.csv",
        breadth_comparison_csv(&breadth_histogram(panel, a.breadth_bins), &model_breadth),
    );

    let (h_hist, j_hist) = parameter_histograms(model.h().as_slice().expect("contiguous"), model.j(), a.histogram_bins)?;
    out.add("analysis/static_h_histogram.csv", h_hist.to_csv());
    out.add("analysis/static_j_histogram.csv", j_hist.to_csv());

    let nodes = NodeAttributes::from_static(model, sectors)?;
    let filtered = filter_top_fraction(model.j(), &nodes, a.filter_fraction)?;
    let g = &filtered.graph;
    out.add("analysis/network_edges.csv", g.edges_csv());
    out.add("analysis/network_nodes.csv", g.nodes_csv());
    let components = connected_components(g);
    let clustering = clustering_coefficient(g);
    let path = average_shortest_path(g);
    let assort = sector_assortativity(g);
    let sigma = soft(small_world_sigma(g, a.benchmark_realizations, derive_seed(seed, BENCHMARK_STREAM)), "small-world benchmark")?;
    if let Some(b) = &sigma {
        out.add("analysis/benchmark_random.csv", b.to_csv());
    }
    let ws = soft(
        watts_strogatz_benchmark(g, a.watts_strogatz_beta, a.watts_strogatz_realizations, derive_seed(seed, BENCHMARK_STREAM)),
        "Watts-Strogatz benchmark",
    )?;
    if let Some(w) = &ws {
        out.add("analysis/benchmark_watts_strogatz.csv", w.to_csv());
    }

    let signed = sector_matrices(model.j(), sectors, SectorMode::Signed, false)?;
    let abs = sector_matrices(model.j(), sectors, SectorMode::Abs, false)?;
    out.add("analysis/static_sector_signed.csv", signed.to_csv());
    out.add("analysis/static_sector_abs.csv", abs.to_csv());
    let sector_net = sector_network_summary(model.j(), model.h().as_slice().expect("contiguous"), sectors, a.sector_edge_percentile)?;
    out.add("analysis/sector_network_nodes.csv", sector_net.nodes_csv());
    out.add("analysis/sector_network_edges.csv", sector_net.edges_csv());

    let bb = backbone(g, a.backbone_fraction)?;
    out.add("analysis/backbone_edges.csv", bb.graph.edges_csv());
    let prom = prominence_select(model.h().as_slice().expect("contiguous"), model.j(), panel.tickers(), a.prominence_fraction)?;
    out.add("analysis/prominence.csv", prom.to_csv());

    let t = STATIC_TABLE;
    let sec = "Filtering and graph size";
    s.push(t, sec, "Number of stocks / unique pairwise couplings", format!("{n} / {}", filtered.pair_count));
    s.push(t, sec, "Filtering rule", format!("Top fraction {} of |J_ij|", a.filter_fraction));
    s.push(t, sec, "Top-fraction cutoff on |J_ij|", num(filtered.cutoff));
    s.push(
        t,
        sec,
        "Retained edges / edge fraction",
        format!("{} / {:.4}", g.n_edges(), filtered.edge_fraction()),
    );
    s.push(t, sec, "Connected components", components.len().to_string());

    let sec = "Filtered-network diagnostics";
    s.push(t, sec, "Nodes / edges", format!("{} / {}", g.n_nodes(), g.n_edges()));
    s.push(t, sec, "Average degree", format!("{:.2}", g.mean_degree()));
    s.push(t, sec, "Average clustering coefficient", num(Some(clustering)));
    let path_value = if path.average.is_finite() && path.n_components > 1 {
        format!("{} ({})", num(Some(path.average)), path.note())
    } else {
        num(Some(path.average))
    };
    s.push(t, sec, "Average shortest-path length (largest connected component)", path_value);
    s.push(
        t,
        sec,
        "Number of positive / negative edges",
        format!("{} / {}", g.positive_edges(), g.negative_edges()),
    );
    s.push(t, sec, "Sector assortativity", num(assort));
    s.push(t, sec, "Small-world coefficient sigma", num(sigma.as_ref().map(|b| b.sigma)));

    let sec = "Sector-level structure";
    push_sector_pair(s, t, sec, "", &abs);
    let k = a.top_k;
    let within: Vec<String> = abs.ranked_within().iter().map(|(sec, v)| labelled(sec.name(), *v)).collect();
    s.push_ranked(t, sec, "Largest within-sector mean |J_ij|", &within, k);
    let by_field: Vec<String> = sector_net
        .ranked_by_field()
        .iter()
        .map(|(sec, v)| labelled(sec.name(), *v))
        .collect();
    s.push_ranked(t, sec, "Largest sector mean |h_i|", &by_field, k);

    let sec = "Stock-level diagnostics";
    let by_h = top_by(panel.tickers(), &model.h().mapv(f64::abs).to_vec(), k);
    s.push_ranked(t, sec, "Largest |h_i|", &by_h, k);
    let by_strength = top_by(panel.tickers(), g.strength(), k);
    s.push_ranked(t, sec, "Largest sum_j |J_ij|", &by_strength, k);
    Ok(abs)
}

fn static_placeholder(cfg: &RunConfig, panel: &SpinPanel, s: &mut Summary) {
    let t = STATIC_TABLE;
    let n = panel.n_stocks();
    let k = cfg.analysis.top_k;
    let sec = "Filtering and graph size";
    s.push(t, sec, "Number of stocks / unique pairwise couplings", format!("{n} / {}", n * n.saturating_sub(1) / 2));
    s.push(t, sec, "Filtering rule", format!("Top fraction {} of |J_ij|", cfg.analysis.filter_fraction));
    for row in ["Top-fraction cutoff on |J_ij|", "Retained edges / edge fraction", "Connected components"] {
        s.push(t, sec, row, NA);
    }
    let sec = "Filtered-network diagnostics";
    for row in [
        "Nodes / edges",
        "Average degree",
        "Average clustering coefficient",
        "Average shortest-path length (largest connected component)",
        "Number of positive / negative edges",
        "Sector assortativity",
        "Small-world coefficient sigma",
    ] {
        s.push(t, sec, row, NA);
    }
    let sec = "Sector-level structure";
    s.push(t, sec, "Within-sector mean |J_ij| / between-sector mean |J_ij|", NA);
    s.push(t, sec, "Within/between ratio", NA);
    s.push_ranked(t, sec, "Largest within-sector mean |J_ij|", &[], k);
    s.push_ranked(t, sec, "Largest sector mean |h_i|", &[], k);
    let sec = "Stock-level diagnostics";
    s.push_ranked(t, sec, "Largest |h_i|", &[], k);
    s.push_ranked(t, sec, "Largest sum_j |J_ij|", &[], k);
}

#[allow(clippy::too_many_arguments)]
fn analyze_kinetic(
    cfg: &RunConfig,
    panel: &SpinPanel,
    model: &KineticIsingModel,
    static_model: Option<&StaticIsingModel>,
    static_sectors: Option<&SectorMatrix>,
    out: &mut Staged,
    s: &mut Summary,
) -> Result<()> {
    let a = &cfg.analysis;
    let n = model.n();
    let sectors = panel.sectors();

    out.add("analysis/field_decomposition.csv", field_decomposition(model, panel)?.to_csv());
    let fit = market_fit_report(model, panel, &cfg.windows)?;
    out.add("analysis/market_fit.csv", fit.series_csv());
    out.add("analysis/window_fields.csv", fit.windows_csv());
    out.add("analysis/calibration.csv", calibration_table(model, panel, a.calibration_bins)?.to_csv());
    out.add("analysis/lag1_comparison.csv", lag1_csv(panel, model)?);
    let memory = self_memory_summary(model, a.top_k);
    out.add("analysis/self_memory.csv", memory.to_csv());
    out.add(
        "analysis/kinetic_a_histogram.csv",
        Histogram::auto(&model.a().to_vec(), a.histogram_bins).to_csv(),
    );
    let off_diag: Vec<f64> = off_diagonal(model.j());
    out.add("analysis/kinetic_j_histogram.csv", Histogram::auto(&off_diag, a.histogram_bins).to_csv());

    let couplings = coupling_summary(model.j(), true)?;
    let k_signed = sector_matrices(model.j(), sectors, SectorMode::Signed, true)?;
    let k_abs = sector_matrices(model.j(), sectors, SectorMode::Abs, true)?;
    out.add("analysis/kinetic_sector_signed.csv", k_signed.to_csv());
    out.add("analysis/kinetic_sector_abs.csv", k_abs.to_csv());
    let asym = if n >= 2 { Some(asymmetry_index(model.j())?) } else { None };
    let symmetry = if n >= 3 { Some(symmetry_correlations(model.j())?) } else { None };
    let strengths = match static_model {
        Some(sm) => {
            let cmp = static_vs_kinetic_strength(sm.j(), model.j(), panel.tickers())?;
            out.add("analysis/strength_comparison.csv", cmp.to_csv());
            Some(cmp)
        }
        None => None,
    };

    let t = KINETIC_TABLE;
    s.push(
        t,
        "Sample and model size",
        "Number of stocks / one-step transitions / basis count",
        format!("{n} / {} / {}", panel.n_days() - 1, model.basis().n_basis()),
    );
    let sec = "Market-level fit and regime diagnostics";
    s.push(t, sec, "Spearman rho_s between model-predicted and empirical market means", corr(&fit.spearman_predicted));
    s.push(
        t,
        sec,
        "Full-sample mean h_bar(t) / standard deviation h_bar(t)",
        pair(num(Some(fit.h_bar_mean)), num(Some(fit.h_bar_std))),
    );
    s.push(t, sec, "Spearman rho_s(h_bar(t), empirical market mean)", corr(&fit.spearman_h_bar));
    s.push(t, sec, "Spearman rho_s(theta_bar(t), empirical market mean)", corr(&fit.spearman_theta_bar));

    let sec = "Windowed field diagnostics";
    for w in &fit.windows {
        let value = match (w.mean_h_bar, w.mean_theta_bar, w.mean_breadth) {
            (None, None, None) => NA.to_string(),
            (h, th, b) => format!("{}, {}, {}", num(h), num(th), num(b)),
        };
        s.push(t, sec, &w.name, value);
    }

    let sec = "Self-memory terms";
    s.push(t, sec, "Mean a_i / median a_i", pair(num(Some(memory.mean)), num(Some(memory.median))));
    s.push(
        t,
        sec,
        "Fraction positive / negative a_i",
        pair(num(Some(memory.fraction_positive)), num(Some(memory.fraction_negative))),
    );
    let fmt_list = |xs: &[(String, f64)]| xs.iter().map(|(tk, v)| labelled(tk, *v)).collect::<Vec<_>>();
    s.push_ranked(t, sec, "Largest positive a_i", &fmt_list(&memory.top_positive), a.top_k);
    s.push_ranked(t, sec, "Most negative a_i", &fmt_list(&memory.top_negative), a.top_k);

    let sec = "Directed-coupling diagnostics";
    s.push(
        t,
        sec,
        "Mean J_ij / standard deviation J_ij",
        pair(num(Some(couplings.mean)), num(Some(couplings.std))),
    );
    s.push(
        t,
        sec,
        "Mean |J_ij| / 90th percentile |J_ij|",
        pair(num(Some(couplings.mean_abs)), num(Some(couplings.p90_abs))),
    );
    push_sector_pair(s, t, sec, "", &k_abs);
    s.push(t, sec, "Frobenius asymmetry index", num(asym));
    s.push(
        t,
        sec,
        "Symmetry Spearman rho_s(J_ij,J_ji) / Pearson r(J_ij,J_ji)",
        symmetry.map_or(NA.into(), |(sp, pe)| pair(corr(&sp), corr(&pe))),
    );
    push_comparison(s, static_sectors, strengths.as_ref().map(|c| [&c.spearman_total, &c.spearman_in, &c.spearman_out]));
    Ok(())
}

fn kinetic_placeholder(cfg: &RunConfig, panel: &SpinPanel, static_sectors: Option<&SectorMatrix>, s: &mut Summary) {
    let t = KINETIC_TABLE;
    let k = cfg.analysis.top_k;
    s.push(
        t,
        "Sample and model size",
        "Number of stocks / one-step transitions / basis count",
        format!("{} / {} / {}", panel.n_stocks(), panel.n_days().saturating_sub(1), NA),
    );
    let sec = "Market-level fit and regime diagnostics";
    for row in [
        "Spearman rho_s between model-predicted and empirical market means",
        "Full-sample mean h_bar(t) / standard deviation h_bar(t)",
        "Spearman rho_s(h_bar(t), empirical market mean)",
        "Spearman rho_s(theta_bar(t), empirical market mean)",
    ] {
        s.push(t, sec, row, NA);
    }
    let sec = "Windowed field diagnostics";
    s.push(t, sec, "Full sample", NA);
    for w in &cfg.windows {
        s.push(t, sec, &w.name, NA);
    }
    let sec = "Self-memory terms";
    s.push(t, sec, "Mean a_i / median a_i", NA);
    s.push(t, sec, "Fraction positive / negative a_i", NA);
    s.push_ranked(t, sec, "Largest positive a_i", &[], k);
    s.push_ranked(t, sec, "Most negative a_i", &[], k);
    let sec = "Directed-coupling diagnostics";
    for row in [
        "Mean J_ij / standard deviation J_ij",
        "Mean |J_ij| / 90th percentile |J_ij|",
        "Within-sector mean |J_ij| / between-sector mean |J_ij|",
        "Within/between ratio",
        "Frobenius asymmetry index",
        "Symmetry Spearman rho_s(J_ij,J_ji) / Pearson r(J_ij,J_ji)",
    ] {
        s.push(t, sec, row, NA);
    }
    push_comparison(s, static_sectors, None);
}

fn push_comparison(s: &mut Summary, static_sectors: Option<&SectorMatrix>, spearman: Option<[&Correlation; 3]>) {
    let sec = "Comparison with the static network";
    match static_sectors {
        Some(m) => push_sector_pair(s, KINETIC_TABLE, sec, "Static ", m),
        None => {
            s.push(KINETIC_TABLE, sec, "Static within-sector mean |J_ij| / between-sector mean |J_ij|", NA);
            s.push(KINETIC_TABLE, sec, "Static within/between ratio", NA);
        }
    }
    s.push(
        KINETIC_TABLE,
        sec,
        "Spearman rho_s (static strength, kinetic total / incoming / outgoing strength)",
        spearman.map_or(NA.into(), |cs| cs.iter().map(|c| corr(c)).collect::<Vec<_>>().join(" / ")),
    );
}

fn push_sector_pair(s: &mut Summary, table: &str, section: &str, prefix: &str, m: &SectorMatrix) {
    let lower = if prefix.is_empty() { "Within" } else { "within" };
    s.push(
        table,
        section,
        &format!("{prefix}{lower}-sector mean |J_ij| / between-sector mean |J_ij|"),
        pair(num(Some(m.within_mean)), num(Some(m.between_mean))),
    );
    s.push(table, section, &format!("{prefix}{lower}/between ratio"), num(m.ratio()));
}

fn corr(c: &Correlation) -> String {
    if c.degenerate {
        NA.into()
    } else {
        num(Some(c.value))
    }
}

/// `k` largest values as "TICKER (value)", ties broken by ticker.
fn top_by(tickers: &[String], values: &[f64], k: usize) -> Vec<String> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then_with(|| tickers[a].cmp(&tickers[b])));
    idx.into_iter().take(k).map(|i| labelled(&tickers[i], values[i])).collect()
}

fn off_diagonal(j: &Array2<f64>) -> Vec<f64> {
    j.indexed_iter().filter(|((a, b), _)| a != b).map(|(_, v)| *v).collect()
}

fn lag1_csv(panel: &SpinPanel, model: &KineticIsingModel) -> Result<String> {
    let emp = lag1_cross_correlation(panel)?;
    let fit = model_lag1_correlations(model, panel)?;
    let tickers = panel.tickers();
    let mut out = String::from("target,source,empirical,model\n");
    for ((i, j), e) in emp.values.indexed_iter() {
        if i != j {
            out.push_str(&format!("{},{},{},{}\n", tickers[i], tickers[j], e, fit.values[(i, j)]));
        }
    }
    Ok(out)
}

fn breadth_comparison_csv(empirical: &Histogram, model: &Histogram) -> String {
    let (te, tm) = (empirical.total().max(1) as f64, model.total().max(1) as f64);
    let mut out = String::from("bin_lo,bin_hi,empirical_count,model_count,empirical_freq,model_freq\n");
    for b in 0..empirical.counts.len() {
        let (ce, cm) = (empirical.counts[b], model.counts[b]);
        out.push_str(&format!(
            "{},{},{ce},{cm},{},{}\n",
            empirical.edges[b],
            empirical.edges[b + 1],
            ce as f64 / te,
            cm as f64 / tm
        ));
    }
    out
}

/// Benchmarks are skipped (reported as n/a) on graphs too small or sparse
/// for them; other failures propagate.
fn soft<T>(r: Result<T>, what: &str) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::InsufficientData(_) | Error::InvalidInput(_))) => {
            log::warn!("{what} skipped: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn load_panel(root: &Path) -> Result<SpinPanel> {
    let path = root.join(PANEL_FILE);
    if !path.is_file() {
        return Err(Error::Config(format!(
            "{} not found; run the ingest stage first",
            path.display()
        )));
    }
    let panel = SpinPanel::load_csv(&path)?;
    let sectors = root.join(PANEL_SECTORS_FILE);
    Ok(if sectors.is_file() {
        panel.with_sectors(&SectorTable::load(&sectors)?)
    } else {
        panel
    })
}

fn load_optional<T>(path: &Path, load: impl FnOnce(&Path) -> Result<T>) -> Result<Option<T>> {
    if path.is_file() {
        load(path).map(Some)
    } else {
        Ok(None)
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn finish(stage: Stage, out: Staged, root: &Path) -> Result<StageReport> {
    let files = out.commit(root)?;
    for f in &files {
        log::debug!("wrote {}", f.display());
    }
    Ok(StageReport { stage, files })
}
