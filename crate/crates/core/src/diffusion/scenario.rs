use std::path::Path;

use serde::{Deserialize, Serialize};

use super::KirchhoffLaplacian;
use crate::graph::GraphDocument;
use crate::transport::{EdgeField, InitialData, Profile};
use crate::{Error, Result};

fn default_cells() -> usize {
    64
}

fn default_t_end() -> f64 {
    1.0
}

fn default_k_max() -> usize {
    5
}

fn default_initial() -> InitialData {
    InitialData::Profile(Profile::Bump)
}

/// Diffusion scenario file: graph fields at top level plus heat parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionScenario {
    #[serde(flatten)]
    pub graph: GraphDocument,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

impl DiffusionScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn laplacian(&self) -> Result<KirchhoffLaplacian> {
        Ok(KirchhoffLaplacian::new(self.graph.metric_graph()?))
    }

    pub fn initial_field(&self) -> Result<EdgeField> {
        self.initial.field(self.graph.edges.len(), self.cells)
    }
}
