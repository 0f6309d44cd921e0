//! Interaction-network diagnostics for a block-structured coupling matrix:
//! filtering, small-world benchmark, sectors, backbone and prominence.

use market_ising::network::{
    average_shortest_path, backbone, clustering_coefficient, filter_top_fraction, prominence_select,
    sector_assortativity, sector_matrices, small_world_sigma, NodeAttributes, SectorMode,
};
use market_ising::panel::default_tickers;
use market_ising::rng::stream;
use market_ising::Sector;
use ndarray::{Array1, Array2};
use rand::Rng;

fn main() -> market_ising::Result<()> {
    let sectors_used = [Sector::Energy, Sector::Financials, Sector::Utilities, Sector::InformationTechnology];
    let n = 60;
    let sectors: Vec<Sector> = (0..n).map(|i| sectors_used[i % 4]).collect();
    let mut rng = stream(31, 0);
    let mut j = Array2::zeros((n, n));
    for a in 0..n {
        for b in a + 1..n {
            let base = if sectors[a] == sectors[b] { 0.05 } else { 0.0 };
            let v = base + 0.04 * (rng.random::<f64>() - 0.5);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    let h = Array1::from_shape_fn(n, |_| 0.1 * (rng.random::<f64>() - 0.5));
    let tickers = default_tickers(n);
    let nodes = NodeAttributes::new(tickers.clone(), sectors.clone(), h.to_vec())?;

    let filtered = filter_top_fraction(&j, &nodes, 0.1)?;
    let g = &filtered.graph;
    println!("kept {} of {} pairs (cutoff {:.4})", g.n_edges(), filtered.pair_count, filtered.cutoff.unwrap_or(f64::NAN));
    println!("clustering {:.3}, path length {:.3}", clustering_coefficient(g), average_shortest_path(g).average);
    println!("sector assortativity {:.3}", sector_assortativity(g).unwrap_or(f64::NAN));
    let bench = small_world_sigma(g, 100, 32)?;
    println!("small-world sigma {:.3} (C_rand {:.3}, L_rand {:.3})", bench.sigma, bench.mean_random_clustering, bench.mean_random_path_length);

    let m = sector_matrices(&j, &sectors, SectorMode::Abs, false)?;
    println!("within/between |J|: {:.4} / {:.4} (ratio {:.2})", m.within_mean, m.between_mean, m.ratio().unwrap_or(f64::NAN));

    let bb = backbone(g, 0.1)?;
    println!("backbone: {} tree + {} extra edges", bb.tree_edges, bb.extra_edges);
    let prom = prominence_select(h.as_slice().unwrap(), &j, &tickers, 0.05)?;
    println!("prominent stocks: {:?}", prom.selected_tickers());
    Ok(())
}
