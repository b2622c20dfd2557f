use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Digraph, Edge, MetricGraph, PlanarEmbedding};
use crate::{Error, Result};

/// On-disk graph description. Vertex indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub tail: usize,
    pub head: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_digraph(g: &Digraph) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord { tail: e.tail + 1, head: e.head + 1, weight: e.weight })
                .collect(),
            lengths: None,
            coords: None,
        }
    }

    pub fn digraph(&self) -> Result<Digraph> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for (j, r) in self.edges.iter().enumerate() {
            if r.tail == 0 || r.head == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {} uses vertex 0; indices start at 1",
                    j + 1
                )));
            }
            edges.push(Edge::new(r.tail - 1, r.head - 1, r.weight));
        }
        Digraph::new(self.vertices, edges)
    }

    /// Metric graph with the declared lengths, or unit lengths when absent.
    pub fn metric_graph(&self) -> Result<MetricGraph> {
        let g = self.digraph()?;
        match &self.lengths {
            Some(l) => MetricGraph::new(g, l.clone()),
            None => Ok(MetricGraph::equilateral(g)),
        }
    }

    pub fn embedding(&self, graph: &MetricGraph) -> Result<Option<PlanarEmbedding>> {
        self.coords.as_ref().map(|c| PlanarEmbedding::new(graph, c.clone())).transpose()
    }
}
