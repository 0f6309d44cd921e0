//! Interaction networks built from coupling matrices, and their structural
//! diagnostics: filtering, clustering and path length, random-graph
//! benchmarks, sector aggregation, backbone extraction, prominence ranking
//! and directed-coupling summaries.

mod backbone;
mod benchmark;
mod directed;
mod graph;
mod metrics;
mod prominence;
mod sectors;

pub use backbone::{backbone, maximum_spanning_forest, BackboneGraph};
pub use benchmark::{
    gnm_random_graph, nearest_even_degree, small_world_sigma, watts_strogatz_benchmark, watts_strogatz_graph,
    BenchmarkResult, GraphSample, Quartiles, WattsStrogatzBenchmark,
};
pub use directed::{
    asymmetry_index, coupling_summary, directed_strengths, parameter_histograms, static_vs_kinetic_strength,
    symmetry_correlations, CouplingSummary, DirectedStrengths, StrengthComparison,
};
pub use graph::{
    filter_top_fraction, node_strength, retained_count, symmetrize, Edge, FilteredGraph, InteractionGraph,
    NodeAttributes,
};
pub use metrics::{
    average_shortest_path, bfs_distances, clustering_coefficient, connected_components, local_clustering,
    sector_assortativity, PathLength,
};
pub use prominence::{prominence_select, ProminenceResult, ProminenceRow};
pub use sectors::{
    sector_matrices, sector_network_summary, SectorEdge, SectorMatrix, SectorMode, SectorNetwork, SectorNode,
};
