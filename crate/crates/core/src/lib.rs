//! Numerical toolkit for dynamical systems on networks.
//!
//! The crate is organised along the ladder of network models it supports:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | digraphs, metric graphs, planar embeddings and the full matrix operator suite |
//! | [`measures`] | flow statistics (Finn cycling index, reciprocity), centralities, Louvain, k-shells, random graphs, contagion cascades |
//! | [`ode`] | diffusively coupled agents, synchronisation, Kronecker Jacobians and spectral network identification |
//! | [`transport`] | advection on metric graphs: exact evolution, spectrum, asymptotic decomposition, virus-variant prevalence |
//! | [`diffusion`] | Kirchhoff Laplacian: equilateral spectrum, heat flow, grid-graph Dirichlet problem |
//! | [`traffic`] | Payne–Whitham simulation on embedded road networks with signals |
//!
//! Vertices and edges are indexed from 0 in the API and from 1 in every file
//! format.

// NaN-rejecting comparisons read `!(x >= 0.0)`; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diffusion;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod measures;
pub mod ode;
pub mod traffic;
pub mod transport;

pub use error::{Error, Result};
pub use graph::{Digraph, Edge, MetricGraph, OperatorSuite, PlanarEmbedding};
pub use nalgebra::{Complex, DMatrix, DVector};
pub use num_rational::Ratio;

/// Version string reported by tools built on this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
