//! Weighted flow statistics, centralities, communities, shells, overlap
//! networks, random graphs and contagion cascades.

mod cascade;
mod centrality;
mod flow;
mod generators;
mod kshell;
mod louvain;
mod overlap;

pub use cascade::{cascade, CascadeConfig, CascadeOutcome, LinkPolicy, DEFAULT_THRESHOLD_FRACTION};
pub use centrality::{centralities, Centralities, PathView};
pub use flow::{
    finn_cycling_index, power_series_overall, reciprocity, reciprocity_of, throughflow_transition,
    vertices_on_cycles, FciReport, FlowAnalysis, FlowSystem, ReciprocityBasis,
};
pub use generators::{generate, RandomGraph};
pub use kshell::k_shells;
pub use louvain::{louvain, modularity, Partition};
pub use overlap::overlap_network;
