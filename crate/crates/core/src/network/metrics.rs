use std::collections::VecDeque;

use serde::Serialize;

use super::InteractionGraph;
use crate::sector::Sector;

/// Local clustering of every node; nodes with degree below 2 get 0.
pub fn local_clustering(g: &InteractionGraph) -> Vec<f64> {
    (0..g.n_nodes())
        .map(|v| {
            let nb = g.neighbors(v);
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (idx, &a) in nb.iter().enumerate() {
                links += nb[idx + 1..].iter().filter(|&&b| g.neighbors(a).binary_search(&b).is_ok()).count();
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

/// Unweighted average local clustering over all nodes.
pub fn clustering_coefficient(g: &InteractionGraph) -> f64 {
    if g.n_nodes() == 0 {
        return 0.0;
    }
    local_clustering(g).iter().sum::<f64>() / g.n_nodes() as f64
}

/// Connected components, each sorted, ordered by their smallest node.
pub fn connected_components(g: &InteractionGraph) -> Vec<Vec<usize>> {
    let n = g.n_nodes();
    let mut label = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        label[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = id;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLength {
    /// Mean shortest-path length over pairs in the largest component
    /// (`NaN` when that component has a single node).
    pub average: f64,
    pub component_size: usize,
    pub n_nodes: usize,
    pub n_components: usize,
}

impl PathLength {
    pub fn coverage(&self) -> f64 {
        if self.n_nodes == 0 {
            return 0.0;
        }
        self.component_size as f64 / self.n_nodes as f64
    }

    pub fn note(&self) -> String {
        if self.component_size == self.n_nodes {
            "graph is connected".to_string()
        } else {
            format!(
                "largest component only: {} of {} nodes in {} components",
                self.component_size, self.n_nodes, self.n_components
            )
        }
    }
}

/// Breadth-first distances from `source` (`usize::MAX` when unreachable).
pub fn bfs_distances(g: &InteractionGraph, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n_nodes()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Average unweighted shortest path over the largest connected component
/// (ties go to the component containing the smallest node).
pub fn average_shortest_path(g: &InteractionGraph) -> PathLength {
    let components = connected_components(g);
    let largest = components
        .iter()
        .fold(None::<&Vec<usize>>, |best, c| match best {
            Some(b) if b.len() >= c.len() => Some(b),
            _ => Some(c),
        })
        .cloned()
        .unwrap_or_default();
    let size = largest.len();
    let mut total = 0u64;
    for &s in &largest {
        let dist = bfs_distances(g, s);
        total += largest.iter().map(|&t| dist[t] as u64).sum::<u64>();
    }
    let pairs = (size * size.saturating_sub(1)) as f64;
    PathLength {
        average: if size >= 2 { total as f64 / pairs } else { f64::NAN },
        component_size: size,
        n_nodes: g.n_nodes(),
        n_components: components.len(),
    }
}

/// Sector assortativity `(Σ e_aa - Σ a_a b_a) / (1 - Σ a_a b_a)` from the
/// symmetric mixing matrix of edges whose endpoints both have a known
/// sector. `None` without such edges; a graph whose edges all sit inside a
/// single sector scores 1.
pub fn sector_assortativity(g: &InteractionGraph) -> Option<f64> {
    let sectors = &g.nodes().sectors;
    let k = Sector::ALL.len();
    let index = |s: Sector| Sector::ALL.iter().position(|&x| x == s);
    let mut e = vec![vec![0.0f64; k]; k];
    let mut total = 0.0;
    for edge in g.edges() {
        let (Some(a), Some(b)) = (index(sectors[edge.i]), index(sectors[edge.j])) else {
            continue;
        };
        e[a][b] += 1.0;
        e[b][a] += 1.0;
        total += 2.0;
    }
    if total == 0.0 {
        return None;
    }
    let trace: f64 = (0..k).map(|a| e[a][a] / total).sum();
    let ab: f64 = (0..k)
        .map(|a| {
            let row: f64 = e[a].iter().sum::<f64>() / total;
            row * row
        })
        .sum();
    if 1.0 - ab <= 0.0 {
        return Some(1.0);
    }
    Some((trace - ab) / (1.0 - ab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NodeAttributes;
    use proptest::prelude::*;

    fn triangle_count_oracle(g: &InteractionGraph, v: usize) -> (usize, usize) {
        // brute force over all node triples
        let n = g.n_nodes();
        let adj = |a: usize, b: usize| g.neighbors(a).contains(&b);
        let mut tri = 0;
        for a in 0..n {
            for b in a + 1..n {
                if a != v && b != v && adj(v, a) && adj(v, b) && adj(a, b) {
                    tri += 1;
                }
            }
        }
        (tri, g.degree(v))
    }

    fn floyd_warshall(g: &InteractionGraph) -> Vec<Vec<usize>> {
        let n = g.n_nodes();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (v, row) in d.iter_mut().enumerate() {
            row[v] = 0;
            for &w in g.neighbors(v) {
                row[w] = 1;
            }
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if d[a][k] + d[k][b] < d[a][b] {
                        d[a][b] = d[a][k] + d[k][b];
                    }
                }
            }
        }
        d
    }

    fn graph_strategy() -> impl Strategy<Value = InteractionGraph> {
        (2usize..20).prop_flat_map(|n| {
            proptest::collection::vec(proptest::bool::weighted(0.25), n * (n - 1) / 2).prop_map(move |mask| {
                let mut pairs = Vec::new();
                let mut k = 0;
                for a in 0..n {
                    for b in a + 1..n {
                        if mask[k] {
                            pairs.push((a, b));
                        }
                        k += 1;
                    }
                }
                InteractionGraph::from_pairs(n, &pairs).unwrap()
            })
        })
    }

    #[test]
    fn small_graphs_by_hand() {
        let triangle = InteractionGraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(clustering_coefficient(&triangle), 1.0);
        assert_eq!(average_shortest_path(&triangle).average, 1.0);
        let star = InteractionGraph::from_pairs(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(clustering_coefficient(&star), 0.0);
        // triangle plus a pendant on node 2
        let g = InteractionGraph::from_pairs(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert_eq!(local_clustering(&g), vec![1.0, 1.0, 1.0 / 3.0, 0.0]);
        assert!((clustering_coefficient(&g) - (7.0 / 3.0) / 4.0).abs() < 1e-15);
        let path = InteractionGraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((average_shortest_path(&path).average - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn disconnected_graph_uses_largest_component() {
        let g = InteractionGraph::from_pairs(6, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        let p = average_shortest_path(&g);
        assert_eq!(p.component_size, 3);
        assert_eq!(p.n_components, 3);
        assert!((p.average - 4.0 / 3.0).abs() < 1e-15);
        assert!(p.note().contains("3 of 6"));
        assert!(average_shortest_path(&InteractionGraph::from_pairs(2, &[]).unwrap()).average.is_nan());
    }

    fn with_sectors(g: &InteractionGraph, sectors: Vec<Sector>) -> InteractionGraph {
        let n = g.n_nodes();
        let nodes = NodeAttributes::new(crate::panel::default_tickers(n), sectors, vec![0.0; n]).unwrap();
        InteractionGraph::new(nodes, vec![0.0; n], g.edges().to_vec()).unwrap()
    }

    #[test]
    fn assortativity_cases() {
        let base = InteractionGraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let within = with_sectors(&base, vec![Sector::Energy; 4]);
        assert_eq!(sector_assortativity(&within), Some(1.0));
        let two = with_sectors(&base, vec![Sector::Energy, Sector::Energy, Sector::Utilities, Sector::Utilities]);
        assert_eq!(sector_assortativity(&two), Some(1.0));
        // only cross edges between two equal groups: e_aa = 0, a_a = 1/2
        let bip = InteractionGraph::from_pairs(4, &[(0, 2), (1, 3), (0, 3)]).unwrap();
        let bip = with_sectors(&bip, vec![Sector::Energy, Sector::Energy, Sector::Utilities, Sector::Utilities]);
        assert_eq!(sector_assortativity(&bip), Some(-1.0));
        // mixed: one within edge, two cross; e = [[2,2],[2,0]]/6 -> a = (2/3, 1/3)
        let mix = InteractionGraph::from_pairs(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let mix = with_sectors(&mix, vec![Sector::Energy, Sector::Energy, Sector::Utilities]);
        let ab = (4.0 / 9.0) + (1.0 / 9.0);
        let expected = (1.0 / 3.0 - ab) / (1.0 - ab);
        assert!((sector_assortativity(&mix).unwrap() - expected).abs() < 1e-15);
        assert_eq!(sector_assortativity(&base), None);
    }

    proptest! {
        #[test]
        fn clustering_matches_triangle_enumeration(g in graph_strategy()) {
            let local = local_clustering(&g);
            for v in 0..g.n_nodes() {
                let (tri, k) = triangle_count_oracle(&g, v);
                let expected = if k < 2 { 0.0 } else { 2.0 * tri as f64 / (k * (k - 1)) as f64 };
                prop_assert_eq!(local[v], expected);
            }
        }

        #[test]
        fn path_length_matches_floyd_warshall(g in graph_strategy()) {
            let d = floyd_warshall(&g);
            let comps = connected_components(&g);
            let largest = comps.iter().max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0]))).unwrap();
            let p = average_shortest_path(&g);
            prop_assert_eq!(p.component_size, largest.len());
            if largest.len() >= 2 {
                let total: usize = largest.iter().flat_map(|&a| largest.iter().map(move |&b| (a, b))).map(|(a, b)| d[a][b]).sum();
                let expected = total as f64 / (largest.len() * (largest.len() - 1)) as f64;
                prop_assert_eq!(p.average, expected);
            }
        }
    }
}
