use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::default_tickers;
use crate::sector::Sector;
use crate::static_model::StaticIsingModel;

/// Per-stock labels and attributes carried into graphs and reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeAttributes {
    pub tickers: Vec<String>,
    pub sectors: Vec<Sector>,
    pub h: Vec<f64>,
}

impl NodeAttributes {
    pub fn new(tickers: Vec<String>, sectors: Vec<Sector>, h: Vec<f64>) -> Result<Self> {
        if sectors.len() != tickers.len() || h.len() != tickers.len() {
            return Err(Error::InvalidInput(format!(
                "node attributes disagree in length: {} tickers, {} sectors, {} fields",
                tickers.len(),
                sectors.len(),
                h.len()
            )));
        }
        Ok(NodeAttributes { tickers, sectors, h })
    }

    /// Default tickers, unknown sectors and zero fields.
    pub fn unlabeled(n: usize) -> Self {
        NodeAttributes {
            tickers: default_tickers(n),
            sectors: vec![Sector::Unknown; n],
            h: vec![0.0; n],
        }
    }

    pub fn from_static(model: &StaticIsingModel, sectors: &[Sector]) -> Result<Self> {
        NodeAttributes::new(model.tickers().to_vec(), sectors.to_vec(), model.h().to_vec())
    }

    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    /// Endpoints with `i < j`.
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl Edge {
    pub fn abs_weight(&self) -> f64 {
        self.weight.abs()
    }
}

/// Undirected, signed, weighted graph over stocks. Node strength is
/// `Σ_j |J_ij|` over the full coupling matrix, not just retained edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionGraph {
    nodes: NodeAttributes,
    strength: Vec<f64>,
    edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn new(nodes: NodeAttributes, strength: Vec<f64>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        if strength.len() != n {
            return Err(Error::InvalidInput("one strength value per node is required".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.i >= e.j || e.j >= n {
                return Err(Error::InvalidInput(format!("invalid edge ({}, {}) for {n} nodes", e.i, e.j)));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidInput(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
            adjacency[e.i].push(e.j);
            adjacency[e.j].push(e.i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(InteractionGraph {
            nodes,
            strength,
            edges,
            adjacency,
        })
    }

    /// Unlabeled graph with unit weights; endpoints may be given in either order.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge {
                i: a.min(b),
                j: a.max(b),
                weight: 1.0,
            })
            .collect();
        InteractionGraph::new(NodeAttributes::unlabeled(n), vec![0.0; n], edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &NodeAttributes {
        &self.nodes
    }

    pub fn strength(&self) -> &[f64] {
        &self.strength
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted neighbour list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n_nodes() == 0 {
            return 0.0;
        }
        2.0 * self.n_edges() as f64 / self.n_nodes() as f64
    }

    pub fn positive_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.weight > 0.0).count()
    }

    pub fn negative_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.weight < 0.0).count()
    }

    /// Same nodes with a different edge set.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Self> {
        InteractionGraph::new(self.nodes.clone(), self.strength.clone(), edges)
    }

    pub fn edges_csv(&self) -> String {
        let mut out = String::from("ticker_i,ticker_j,weight,abs_weight\n");
        for e in &self.edges {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.nodes.tickers[e.i],
                self.nodes.tickers[e.j],
                e.weight,
                e.abs_weight()
            ));
        }
        out
    }

    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("ticker,sector,h,strength\n");
        for i in 0..self.n_nodes() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.nodes.tickers[i],
                self.nodes.sectors[i].name(),
                self.nodes.h[i],
                self.strength[i]
            ));
        }
        out
    }
}

/// `Σ_j |J_ij|` for every row.
pub fn node_strength(j: &Array2<f64>) -> Array1<f64> {
    j.map_axis(ndarray::Axis(1), |row| row.iter().map(|v| v.abs()).sum())
}

/// `(J + Jᵀ) / 2`, for running undirected analyses on directed couplings.
pub fn symmetrize(j: &Array2<f64>) -> Array2<f64> {
    (j + &j.t()) * 0.5
}

pub(crate) fn check_square(j: &Array2<f64>, n: usize) -> Result<()> {
    if j.dim() != (n, n) {
        return Err(Error::InvalidInput(format!("coupling matrix must be {n}x{n}, got {:?}", j.dim())));
    }
    Ok(())
}

pub(crate) fn check_symmetric(j: &Array2<f64>) -> Result<()> {
    let n = j.nrows();
    for a in 0..n {
        for b in a + 1..n {
            if j[(a, b)] != j[(b, a)] {
                return Err(Error::InvalidInput(
                    "undirected analysis needs a symmetric coupling matrix; symmetrize directed couplings first".into(),
                ));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilteredGraph {
    pub graph: InteractionGraph,
    /// Smallest retained magnitude; `None` when nothing is retained.
    pub cutoff: Option<f64>,
    /// Number of unordered pairs `N(N-1)/2`.
    pub pair_count: usize,
    pub fraction: f64,
}

impl FilteredGraph {
    pub fn edge_fraction(&self) -> f64 {
        if self.pair_count == 0 {
            return 0.0;
        }
        self.graph.n_edges() as f64 / self.pair_count as f64
    }
}

/// Number of edges kept by a top-`fraction` filter over `pairs` pairs.
pub fn retained_count(pairs: usize, fraction: f64) -> usize {
    // tolerance keeps exact products such as 0.2 * 10 from rounding up
    ((fraction * pairs as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Keeps the `ceil(fraction · N(N-1)/2)` largest `|J_ij|` (zero couplings
/// never become edges). Equal magnitudes are ordered by ticker pair.
pub fn filter_top_fraction(j: &Array2<f64>, nodes: &NodeAttributes, fraction: f64) -> Result<FilteredGraph> {
    let n = nodes.len();
    check_square(j, n)?;
    check_symmetric(j)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("filter fraction must be in (0, 1], got {fraction}")));
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("coupling matrix contains non-finite values".into()));
    }
    let pair_count = n * n.saturating_sub(1) / 2;
    let mut candidates: Vec<Edge> = Vec::with_capacity(pair_count);
    for a in 0..n {
        for b in a + 1..n {
            if j[(a, b)] != 0.0 {
                candidates.push(Edge {
                    i: a,
                    j: b,
                    weight: j[(a, b)],
                });
            }
        }
    }
    sort_by_strength(&mut candidates, nodes);
    candidates.truncate(retained_count(pair_count, fraction));
    let cutoff = candidates.last().map(Edge::abs_weight);
    candidates.sort_by_key(|e| (e.i, e.j));
    let graph = InteractionGraph::new(nodes.clone(), node_strength(j).to_vec(), candidates)?;
    Ok(FilteredGraph {
        graph,
        cutoff,
        pair_count,
        fraction,
    })
}

/// Descending `|w|`, then ascending ticker pair.
pub(crate) fn sort_by_strength(edges: &mut [Edge], nodes: &NodeAttributes) {
    let t = &nodes.tickers;
    edges.sort_by(|x, y| {
        y.abs_weight()
            .total_cmp(&x.abs_weight())
            .then_with(|| (&t[x.i], &t[x.j]).cmp(&(&t[y.i], &t[y.j])))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sym(n: usize, f: impl Fn(usize, usize) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((n, n), |(a, b)| if a == b { 0.0 } else { f(a.min(b), a.max(b)) })
    }

    #[test]
    fn keeps_the_largest_magnitudes() {
        // 5 nodes -> 10 pairs with distinct magnitudes; 20% keeps two
        let j = sym(5, |a, b| if (a + b) % 2 == 0 { 1.0 } else { -1.0 } * (1 + a * 5 + b) as f64 / 100.0);
        let f = filter_top_fraction(&j, &NodeAttributes::unlabeled(5), 0.2).unwrap();
        assert_eq!(f.graph.n_edges(), 2);
        let kept: Vec<_> = f.graph.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(kept, vec![(2, 4), (3, 4)]);
        assert_eq!(f.cutoff, Some(0.15));
        assert_eq!(f.pair_count, 10);
    }

    #[test]
    fn ties_break_by_ticker_pair() {
        let j = sym(4, |_, _| 0.5);
        let f = filter_top_fraction(&j, &NodeAttributes::unlabeled(4), 0.5).unwrap();
        let kept: Vec<_> = f.graph.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(kept, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn full_fraction_skips_zero_couplings() {
        let j = array![[0.0, 0.3, 0.0], [0.3, 0.0, -0.2], [0.0, -0.2, 0.0]];
        let f = filter_top_fraction(&j, &NodeAttributes::unlabeled(3), 1.0).unwrap();
        assert_eq!(f.graph.n_edges(), 2);
        assert_eq!(f.graph.positive_edges(), 1);
        assert_eq!(f.graph.negative_edges(), 1);
        assert_eq!(f.graph.strength(), &[0.3, 0.5, 0.2]);
    }

    #[test]
    fn rejects_directed_input_and_bad_fractions() {
        let j = array![[0.0, 0.3], [0.1, 0.0]];
        let nodes = NodeAttributes::unlabeled(2);
        assert!(filter_top_fraction(&j, &nodes, 0.5).is_err());
        assert!(filter_top_fraction(&symmetrize(&j), &nodes, 0.5).is_ok());
        assert!(filter_top_fraction(&symmetrize(&j), &nodes, 0.0).is_err());
        assert!(filter_top_fraction(&symmetrize(&j), &nodes, 1.5).is_err());
    }

    #[test]
    fn retained_count_rounds_up() {
        assert_eq!(retained_count(46_665, 0.1), 4_667);
        assert_eq!(retained_count(10, 0.2), 2);
        assert_eq!(retained_count(10, 0.21), 3);
        assert_eq!(retained_count(0, 0.1), 0);
    }

    #[test]
    fn exports_edges_and_nodes() {
        let nodes = NodeAttributes::new(
            vec!["AAA".into(), "BBB".into()],
            vec![Sector::Energy, Sector::Unknown],
            vec![0.1, -0.2],
        )
        .unwrap();
        let j = array![[0.0, -0.4], [-0.4, 0.0]];
        let g = filter_top_fraction(&j, &nodes, 1.0).unwrap().graph;
        assert_eq!(g.edges_csv(), "ticker_i,ticker_j,weight,abs_weight\nAAA,BBB,-0.4,0.4\n");
        assert_eq!(
            g.nodes_csv(),
            "ticker,sector,h,strength\nAAA,Energy,0.1,0.4\nBBB,unknown,-0.2,0.4\n"
        );
    }

    #[test]
    fn graph_validation() {
        assert!(InteractionGraph::from_pairs(3, &[(0, 0)]).is_err());
        assert!(InteractionGraph::from_pairs(3, &[(0, 1), (1, 0)]).is_err());
        assert!(InteractionGraph::from_pairs(3, &[(0, 3)]).is_err());
        let g = InteractionGraph::from_pairs(3, &[(2, 0), (1, 2)]).unwrap();
        assert_eq!(g.neighbors(2), &[0, 1]);
        assert_eq!(g.mean_degree(), 4.0 / 3.0);
    }
}
