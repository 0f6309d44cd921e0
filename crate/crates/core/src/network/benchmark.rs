//! Random-graph benchmarks for small-world comparisons.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{average_shortest_path, clustering_coefficient};
use super::InteractionGraph;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats;

/// Stream offset separating Watts-Strogatz draws from G(n, m) draws.
const WS_STREAM: u64 = 1 << 32;

/// Uniform graph on `n` nodes with exactly `m` edges.
pub fn gnm_random_graph<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<InteractionGraph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(Error::InvalidInput(format!("{m} edges do not fit on {n} nodes")));
    }
    let mut chosen: Vec<(usize, usize)> = index::sample(rng, pairs, m).into_iter().map(|k| pair_from_index(k, n)).collect();
    chosen.sort_unstable();
    InteractionGraph::from_pairs(n, &chosen)
}

/// Inverse of the row-major enumeration of pairs `(a, b)`, `a < b`.
fn pair_from_index(mut k: usize, n: usize) -> (usize, usize) {
    let mut a = 0;
    while k >= n - 1 - a {
        k -= n - 1 - a;
        a += 1;
    }
    (a, a + 1 + k)
}

/// Watts-Strogatz graph: ring lattice where every node links to its `k / 2`
/// nearest neighbours on each side, then each lattice edge `(u, u + d)` is
/// rewired with probability `beta` to `(u, w)` for a uniform `w` that is
/// neither `u` nor already adjacent.
pub fn watts_strogatz_graph<R: Rng + ?Sized>(n: usize, k: usize, beta: f64, rng: &mut R) -> Result<InteractionGraph> {
    if !k.is_multiple_of(2) || k >= n {
        return Err(Error::InvalidInput(format!("Watts-Strogatz needs an even k < n, got k = {k}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidInput(format!("rewiring probability must be in [0, 1], got {beta}")));
    }
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for u in 0..n {
        for d in 1..=k / 2 {
            let v = (u + d) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for d in 1..=k / 2 {
        for u in 0..n {
            let v = (u + d) % n;
            if rng.random::<f64>() >= beta || adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| adj[u].iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
        .collect();
    InteractionGraph::from_pairs(n, &pairs)
}

/// Even lattice degree closest to `mean_degree`, at least 2 and below `n`.
pub fn nearest_even_degree(mean_degree: f64, n: usize) -> usize {
    let k = 2 * ((mean_degree / 2.0).round() as usize);
    let max_even = if n.is_multiple_of(2) { n.saturating_sub(2) } else { n - 1 };
    k.clamp(2, max_even.max(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn of(xs: &[f64]) -> Self {
        Quartiles {
            min: stats::percentile(xs, 0.0),
            q1: stats::percentile(xs, 25.0),
            median: stats::percentile(xs, 50.0),
            q3: stats::percentile(xs, 75.0),
            max: stats::percentile(xs, 100.0),
        }
    }
}

/// Clustering and path length of one benchmark draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphSample {
    pub clustering: f64,
    pub path_length: f64,
}

fn measure(g: &InteractionGraph) -> GraphSample {
    GraphSample {
        clustering: clustering_coefficient(g),
        path_length: average_shortest_path(g).average,
    }
}

fn samples_csv(model: &str, samples: &[GraphSample]) -> String {
    let mut out = String::from("realization,model,clustering,path_length\n");
    for (r, s) in samples.iter().enumerate() {
        out.push_str(&format!("{r},{model},{},{}\n", s.clustering, s.path_length));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub observed: GraphSample,
    pub random: Vec<GraphSample>,
    pub mean_random_clustering: f64,
    pub mean_random_path_length: f64,
    /// `(C / mean C_rand) / (L / mean L_rand)`.
    pub sigma: f64,
}

impl BenchmarkResult {
    pub fn to_csv(&self) -> String {
        samples_csv("gnm", &self.random)
    }
}

/// Small-world coefficient against `n_realizations` edge-matched uniform
/// random graphs drawn in parallel, realization `r` from stream `(seed, r)`.
pub fn small_world_sigma(g: &InteractionGraph, n_realizations: usize, seed: u64) -> Result<BenchmarkResult> {
    if n_realizations == 0 {
        return Err(Error::Config("small-world benchmark needs at least one realization".into()));
    }
    if g.n_edges() == 0 {
        return Err(Error::InsufficientData("small-world benchmark needs a graph with edges".into()));
    }
    let (n, m) = (g.n_nodes(), g.n_edges());
    let random = (0..n_realizations)
        .into_par_iter()
        .map(|r| gnm_random_graph(n, m, &mut rng::stream(seed, r as u64)).map(|rg| measure(&rg)))
        .collect::<Result<Vec<_>>>()?;
    let observed = measure(g);
    let c_rand = stats::mean(&random.iter().map(|s| s.clustering).collect::<Vec<_>>());
    let l_rand = stats::mean(&random.iter().map(|s| s.path_length).collect::<Vec<_>>());
    let sigma = (observed.clustering / c_rand) / (observed.path_length / l_rand);
    Ok(BenchmarkResult {
        observed,
        random,
        mean_random_clustering: c_rand,
        mean_random_path_length: l_rand,
        sigma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WattsStrogatzBenchmark {
    pub k: usize,
    pub beta: f64,
    pub samples: Vec<GraphSample>,
    pub clustering: Quartiles,
    pub path_length: Quartiles,
}

impl WattsStrogatzBenchmark {
    pub fn to_csv(&self) -> String {
        samples_csv("watts_strogatz", &self.samples)
    }
}

/// Watts-Strogatz draws matching the node count of `g`, with the even
/// lattice degree nearest its mean degree.
pub fn watts_strogatz_benchmark(
    g: &InteractionGraph,
    beta: f64,
    n_realizations: usize,
    seed: u64,
) -> Result<WattsStrogatzBenchmark> {
    if n_realizations == 0 {
        return Err(Error::Config("Watts-Strogatz benchmark needs at least one realization".into()));
    }
    let n = g.n_nodes();
    if n < 3 {
        return Err(Error::InsufficientData("Watts-Strogatz benchmark needs at least 3 nodes".into()));
    }
    let k = nearest_even_degree(g.mean_degree(), n);
    let samples = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            watts_strogatz_graph(n, k, beta, &mut rng::stream(seed, WS_STREAM + r as u64)).map(|wg| measure(&wg))
        })
        .collect::<Result<Vec<_>>>()?;
    let c: Vec<f64> = samples.iter().map(|s| s.clustering).collect();
    let l: Vec<f64> = samples.iter().map(|s| s.path_length).collect();
    Ok(WattsStrogatzBenchmark {
        k,
        beta,
        clustering: Quartiles::of(&c),
        path_length: Quartiles::of(&l),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_round_trip() {
        let n = 7;
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                assert_eq!(pair_from_index(k, n), (a, b));
                k += 1;
            }
        }
    }

    #[test]
    fn gnm_has_requested_size_and_is_reproducible() {
        let a = gnm_random_graph(30, 80, &mut rng::stream(1, 0)).unwrap();
        let b = gnm_random_graph(30, 80, &mut rng::stream(1, 0)).unwrap();
        assert_eq!(a.n_edges(), 80);
        assert_eq!(a, b);
        assert!(gnm_random_graph(4, 7, &mut rng::stream(1, 0)).is_err());
        assert_eq!(gnm_random_graph(4, 6, &mut rng::stream(1, 0)).unwrap().n_edges(), 6);
    }

    #[test]
    fn ring_lattice_clustering_is_analytic() {
        for (n, k) in [(20, 4), (50, 6), (31, 10)] {
            let g = watts_strogatz_graph(n, k, 0.0, &mut rng::stream(0, 0)).unwrap();
            assert_eq!(g.n_edges(), n * k / 2);
            let expected = 3.0 * (k as f64 - 2.0) / (4.0 * (k as f64 - 1.0));
            assert!((clustering_coefficient(&g) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rewiring_keeps_edge_count() {
        let g = watts_strogatz_graph(60, 6, 0.53, &mut rng::stream(3, 0)).unwrap();
        assert_eq!(g.n_edges(), 180);
        assert!(watts_strogatz_graph(10, 3, 0.5, &mut rng::stream(3, 0)).is_err());
    }

    #[test]
    fn fully_rewired_graphs_look_random() {
        let g = gnm_random_graph(100, 400, &mut rng::stream(9, 0)).unwrap();
        let ws = watts_strogatz_benchmark(&g, 1.0, 30, 5).unwrap();
        let rnd = small_world_sigma(&g, 30, 5).unwrap();
        assert_eq!(ws.k, 8);
        assert_eq!(ws.samples.len(), 30);
        assert!((ws.clustering.median - rnd.mean_random_clustering).abs() < 0.02);
        assert!((ws.path_length.median - rnd.mean_random_path_length).abs() < 0.1);
    }

    #[test]
    fn lattice_is_small_world_positive() {
        let g = watts_strogatz_graph(60, 6, 0.0, &mut rng::stream(0, 0)).unwrap();
        let r = small_world_sigma(&g, 10, 2).unwrap();
        assert!(r.sigma.is_finite());
        assert!(r.observed.clustering > 3.0 * r.mean_random_clustering);
        assert_eq!(r.to_csv().lines().count(), 11);
    }

    #[test]
    fn sigma_ignores_node_labels() {
        let g = gnm_random_graph(25, 60, &mut rng::stream(4, 0)).unwrap();
        let perm: Vec<usize> = (0..25).map(|v| (v * 7 + 3) % 25).collect();
        let relabeled: Vec<(usize, usize)> = g.edges().iter().map(|e| (perm[e.i], perm[e.j])).collect();
        let h = InteractionGraph::from_pairs(25, &relabeled).unwrap();
        // only the summation order of local clustering changes
        let (a, b) = (small_world_sigma(&g, 8, 1).unwrap(), small_world_sigma(&h, 8, 1).unwrap());
        assert_eq!(a.random, b.random);
        assert!((a.sigma - b.sigma).abs() < 1e-12);
    }

    #[test]
    fn even_degree_choice() {
        assert_eq!(nearest_even_degree(30.5, 306), 30);
        assert_eq!(nearest_even_degree(31.2, 306), 32);
        assert_eq!(nearest_even_degree(0.4, 10), 2);
        assert_eq!(nearest_even_degree(50.0, 10), 8);
    }
}
