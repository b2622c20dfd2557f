use std::path::Path;

use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{EdgeField, Speed, TransportSystem, VirusModel};
use crate::graph::GraphDocument;
use crate::{Error, Result};

fn default_cells() -> usize {
    32
}

/// Initial data: explicit per-edge cell values or a named profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialData {
    Cells(Vec<Vec<f64>>),
    Profile(Profile),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        #[serde(default = "unit")]
        value: f64,
    },
    /// `sin²(πs)` on every edge.
    Bump,
}

fn unit() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Profile(Profile::Constant { value: 1.0 })
    }
}

impl InitialData {
    pub fn field(&self, edges: usize, cells: usize) -> Result<EdgeField> {
        let f = match self {
            InitialData::Cells(rows) => EdgeField::new(rows.clone())?,
            InitialData::Profile(Profile::Constant { value }) => EdgeField::constant(edges, cells, *value),
            InitialData::Profile(Profile::Bump) => EdgeField::bump(edges, cells),
        };
        if f.edges() != edges {
            return Err(Error::DimMismatch(format!("initial data on {} edges, expected {edges}", f.edges())));
        }
        Ok(f)
    }
}

/// Transport scenario file: graph fields at top level plus velocities,
/// boundary weights (uniform over outgoing edges when omitted) and initial
/// data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportScenario {
    #[serde(flatten)]
    pub graph: GraphDocument,
    pub velocities: Vec<Speed>,
    #[serde(default)]
    pub boundary_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_cells")]
    pub cells: usize,
}

impl TransportScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn system(&self) -> Result<TransportSystem> {
        let mg = self.graph.metric_graph()?;
        let g = mg.digraph();
        let weights = match &self.boundary_weights {
            Some(w) => w.clone(),
            None => (0..g.edge_count()).map(|j| 1.0 / g.out_edges(g.edge(j).tail).len() as f64).collect(),
        };
        TransportSystem::on_graph(&mg, &self.velocities, &weights)
    }

    pub fn initial_field(&self, cells: Option<usize>) -> Result<EdgeField> {
        self.initial.field(self.graph.edges.len(), cells.unwrap_or(self.cells))
    }
}

/// Virus-variant scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirusScenario {
    pub patches: usize,
    pub variants: usize,
    /// Rational infection durations `t_q`, one per variant.
    pub durations: Vec<Speed>,
    /// Row `j`, column `i`: fraction of state `i` moving to state `j`.
    pub weights: Vec<Vec<f64>>,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_cells")]
    pub cells: usize,
}

impl VirusScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn model(&self) -> Result<VirusModel> {
        let size = self.patches * self.variants;
        if self.weights.len() != size || self.weights.iter().any(|r| r.len() != size) {
            return Err(Error::DimMismatch(format!("weights must be {size}×{size}")));
        }
        let w = DMatrix::from_row_iterator(size, size, self.weights.iter().flatten().copied());
        let durations: Vec<Ratio<i64>> = self
            .durations
            .iter()
            .map(|d| d.exact().ok_or_else(|| Error::InvalidParams("durations must be rational".into())))
            .collect::<Result<_>>()?;
        VirusModel::new(self.patches, self.variants, &durations, w)
    }

    pub fn initial_field(&self) -> Result<EdgeField> {
        self.initial.field(self.patches * self.variants, self.cells)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_loop_scenario() {
        let sc = TransportScenario::from_json(
            r#"{"vertices": 1, "edges": [{"tail": 1, "head": 1}], "velocities": ["1"],
                "initial": {"profile": "bump"}, "cells": 8}"#,
        )
        .unwrap();
        let ts = sc.system().unwrap();
        assert_eq!(ts.edge_count(), 1);
        assert_eq!(sc.initial_field(None).unwrap().cells, 8);
    }

    #[test]
    fn default_weights_are_uniform() {
        let sc = TransportScenario::from_json(
            r#"{"vertices": 1, "edges": [{"tail": 1, "head": 1}, {"tail": 1, "head": 1}], "velocities": [1, 1],
                "initial": [[1, 2], [3, 4]]}"#,
        )
        .unwrap();
        assert_eq!(sc.system().unwrap().transfer(), &DMatrix::from_element(2, 2, 0.5));
        assert_eq!(sc.initial_field(None).unwrap().cells, 2);
    }
}
