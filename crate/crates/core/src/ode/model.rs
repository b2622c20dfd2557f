use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{AgentModel, AgentNetwork, DoubleIntegrator, LinearAgent, SingleIntegrator};
use crate::graph::GraphDocument;
use crate::{Error, Result};

/// Built-in agent families available from model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentFamily {
    SingleIntegrator,
    DoubleIntegrator { ts: f64, ks: f64, c1: f64, c2: f64 },
    /// Row-major `B` and `D`.
    Linear { b: Vec<Vec<f64>>, d: Vec<Vec<f64>> },
}

fn square(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    let p = rows.len();
    if p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(Error::DimMismatch(format!("{name} must be a nonempty square matrix")));
    }
    Ok(DMatrix::from_row_iterator(p, p, rows.iter().flatten().copied()))
}

impl AgentFamily {
    pub fn build(&self) -> Result<Box<dyn AgentModel>> {
        Ok(match self {
            AgentFamily::SingleIntegrator => Box::new(SingleIntegrator),
            &AgentFamily::DoubleIntegrator { ts, ks, c1, c2 } => Box::new(DoubleIntegrator { ts, ks, c1, c2 }),
            AgentFamily::Linear { b, d } => {
                let (b, d) = (square(b, "B")?, square(d, "D")?);
                if b.shape() != d.shape() {
                    return Err(Error::DimMismatch("B and D differ in size".into()));
                }
                Box::new(LinearAgent { b, d })
            }
        })
    }
}

fn default_t_end() -> f64 {
    10.0
}

fn default_dt() -> f64 {
    0.01
}

/// Agent-network model file: graph fields at top level plus the family,
/// per-agent initial states and integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub family: AgentFamily,
    #[serde(flatten)]
    pub graph: GraphDocument,
    #[serde(default)]
    pub initial: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Jacobian eigenvalues `[re, im]` for recovery; computed from the
    /// model when absent.
    #[serde(default)]
    pub mu: Option<Vec<[f64; 2]>>,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn network(&self) -> Result<AgentNetwork> {
        AgentNetwork::new(&self.graph.digraph()?, self.family.build()?)
    }

    /// Stacked initial state; zero when not given.
    pub fn initial_state(&self, net: &AgentNetwork) -> Result<Vec<f64>> {
        let (n, p) = (net.agents(), net.model().state_dim());
        match &self.initial {
            None => Ok(vec![0.0; n * p]),
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != p) {
                    return Err(Error::DimMismatch(format!("initial state must be {n} rows of length {p}")));
                }
                Ok(rows.iter().flatten().copied().collect())
            }
        }
    }
}
