use serde::Serialize;

use super::graph::sort_by_strength;
use super::{Edge, InteractionGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackboneGraph {
    pub graph: InteractionGraph,
    pub tree_edges: usize,
    pub extra_edges: usize,
    /// `round(extra_fraction × input edges)`; the tree is kept whole even
    /// when it alone exceeds this.
    pub target_edges: usize,
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Maximum spanning forest on `|J_ij|` (Kruskal; ties by ticker pair).
pub fn maximum_spanning_forest(g: &InteractionGraph) -> Vec<Edge> {
    let mut order = g.edges().to_vec();
    sort_by_strength(&mut order, g.nodes());
    let mut sets = DisjointSets::new(g.n_nodes());
    order.into_iter().filter(|e| sets.union(e.i, e.j)).collect()
}

/// Spanning-forest scaffold plus the strongest remaining edges, up to
/// `round(extra_fraction × edges)` edges in total.
pub fn backbone(g: &InteractionGraph, extra_fraction: f64) -> Result<BackboneGraph> {
    if !(0.0..=1.0).contains(&extra_fraction) {
        return Err(Error::Config(format!("backbone fraction must be in [0, 1], got {extra_fraction}")));
    }
    let target = (extra_fraction * g.n_edges() as f64).round() as usize;
    let tree = maximum_spanning_forest(g);
    let tree_edges = tree.len();
    let in_tree: std::collections::HashSet<(usize, usize)> = tree.iter().map(|e| (e.i, e.j)).collect();
    let mut rest: Vec<Edge> = g.edges().iter().filter(|e| !in_tree.contains(&(e.i, e.j))).copied().collect();
    sort_by_strength(&mut rest, g.nodes());
    rest.truncate(target.saturating_sub(tree_edges));
    let extra_edges = rest.len();
    let mut edges = tree;
    edges.extend(rest);
    edges.sort_by_key(|e| (e.i, e.j));
    Ok(BackboneGraph {
        graph: g.with_edges(edges)?,
        tree_edges,
        extra_edges,
        target_edges: target,
    })
}
