use super::Digraph;
use crate::{Error, Result};

/// Distance tolerance between embedded edge endpoints and declared lengths.
pub const EMBEDDING_TOL: f64 = 1e-9;

/// A digraph whose edge j is the interval `[0, l_j]`, with `0` at the tail
/// and `l_j` at the head.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    digraph: Digraph,
    lengths: Vec<f64>,
}

impl MetricGraph {
    pub fn new(digraph: Digraph, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != digraph.edge_count() {
            return Err(Error::InvalidGraph(format!(
                "{} lengths for {} edges",
                lengths.len(),
                digraph.edge_count()
            )));
        }
        if let Some(j) = lengths.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGraph(format!(
                "edge {} has non-positive length {}",
                j + 1,
                lengths[j]
            )));
        }
        Ok(Self { digraph, lengths })
    }

    /// All edges of length 1.
    pub fn equilateral(digraph: Digraph) -> Self {
        let m = digraph.edge_count();
        Self { digraph, lengths: vec![1.0; m] }
    }

    pub fn digraph(&self) -> &Digraph {
        &self.digraph
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// First edge whose length differs from 1, if any.
    pub fn first_non_unit(&self) -> Option<usize> {
        self.lengths.iter().position(|&l| (l - 1.0).abs() > 1e-12)
    }
}

/// Planar coordinates for the vertices of a metric graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarEmbedding {
    coords: Vec<[f64; 2]>,
}

impl PlanarEmbedding {
    /// Checks that every non-loop edge spans its declared length. Loops have
    /// coincident endpoints and are exempt.
    pub fn new(graph: &MetricGraph, coords: Vec<[f64; 2]>) -> Result<Self> {
        let g = graph.digraph();
        if coords.len() != g.vertex_count() {
            return Err(Error::InvalidGraph(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                g.vertex_count()
            )));
        }
        for (j, e) in g.edges().iter().enumerate() {
            if e.is_loop() {
                continue;
            }
            let d = distance(coords[e.tail], coords[e.head]);
            if (d - graph.lengths()[j]).abs() > EMBEDDING_TOL {
                return Err(Error::InvalidGraph(format!(
                    "edge {} has length {} but its endpoints are {} apart",
                    j + 1,
                    graph.lengths()[j],
                    d
                )));
            }
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn point(&self, v: usize) -> [f64; 2] {
        self.coords[v]
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
