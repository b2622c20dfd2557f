//! Digraphs, metric graphs and their matrix operators.

mod components;
mod digraph;
mod io;
mod metric;
mod operators;

pub use components::{
    component_labels, cycle_period, strong_components, Component, CyclePeriod, TravelTime,
};
pub use digraph::{Digraph, Edge};
pub use io::{EdgeRecord, GraphDocument};
pub use metric::{MetricGraph, PlanarEmbedding, EMBEDDING_TOL};
pub use operators::{line_graph_adjacency, operator_suite, LineWeighting, OperatorSuite};
