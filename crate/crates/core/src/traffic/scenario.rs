use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{AngleConvention, GlobalParams, RoadNetwork, RoadParams, SignalPhase, SignalPlan, Turning};
use super::sim::{DemandProfile, TrafficState};
use crate::graph::GraphDocument;
use crate::{Error, Result};

/// Per-edge initial value: one number for every cell or explicit cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValues {
    Uniform(f64),
    Cells(Vec<f64>),
}

impl CellValues {
    fn expand(&self, cells: usize) -> Result<Vec<f64>> {
        match self {
            CellValues::Uniform(x) => Ok(vec![*x; cells]),
            CellValues::Cells(v) if v.len() == cells => Ok(v.clone()),
            CellValues::Cells(v) => Err(Error::GridMismatch(format!("{} initial cells, expected {cells}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRecord {
    pub edge: usize,
    #[serde(flatten)]
    pub profile: DemandProfile,
}

/// Traffic scenario file. Edge and vertex indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficScenario {
    #[serde(flatten)]
    pub graph: GraphDocument,
    pub roads: Vec<RoadParams>,
    #[serde(flatten)]
    pub global: GlobalParams,
    #[serde(default)]
    pub turning: Vec<Turning>,
    #[serde(default)]
    pub signals: Vec<SignalPlan>,
    #[serde(default)]
    pub demand: Vec<DemandRecord>,
    /// Initial densities per edge; empty roads by default.
    #[serde(default)]
    pub initial_density: Option<Vec<CellValues>>,
    /// Initial speeds per edge; the fundamental diagram by default.
    #[serde(default)]
    pub initial_speed: Option<Vec<CellValues>>,
    #[serde(default)]
    pub angle_convention: AngleConvention,
}

fn zero_based(k: usize, what: &str) -> Result<usize> {
    k.checked_sub(1).ok_or_else(|| Error::InvalidInput(format!("{what} index 0; indices start at 1")))
}

impl TrafficScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn network(&self) -> Result<RoadNetwork> {
        let mg = self.graph.metric_graph()?;
        let emb = self
            .graph
            .embedding(&mg)?
            .ok_or_else(|| Error::InvalidGraph("traffic networks need vertex coordinates".into()))?;
        let turning = self
            .turning
            .iter()
            .map(|t| Ok(Turning { from: zero_based(t.from, "edge")?, to: zero_based(t.to, "edge")?, weight: t.weight }))
            .collect::<Result<Vec<_>>>()?;
        let signals = self
            .signals
            .iter()
            .map(|s| {
                Ok(SignalPlan {
                    vertex: zero_based(s.vertex, "vertex")?,
                    plan: s
                        .plan
                        .iter()
                        .map(|p| {
                            Ok(SignalPhase {
                                green: p.green.iter().map(|&e| zero_based(e, "edge")).collect::<Result<_>>()?,
                                duration: p.duration,
                            })
                        })
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RoadNetwork::new(mg, emb, self.roads.clone(), self.global, &turning, &signals, self.angle_convention)
    }

    pub fn demand(&self) -> Result<Vec<Option<DemandProfile>>> {
        let m = self.graph.edges.len();
        let mut out = vec![None; m];
        for d in &self.demand {
            let j = zero_based(d.edge, "edge")?;
            if j >= m {
                return Err(Error::InvalidInput(format!("demand on missing edge {}", d.edge)));
            }
            out[j] = Some(d.profile.clone());
        }
        Ok(out)
    }

    pub fn initial_state(&self, net: &RoadNetwork) -> Result<TrafficState> {
        let expand = |vals: &Option<Vec<CellValues>>| -> Result<Option<Vec<Vec<f64>>>> {
            vals.as_ref()
                .map(|v| {
                    if v.len() != net.roads().len() {
                        return Err(Error::DimMismatch(format!("{} initial rows for {} edges", v.len(), net.roads().len())));
                    }
                    v.iter().zip(net.roads()).map(|(c, r)| c.expand(r.cells)).collect()
                })
                .transpose()
        };
        let rho = expand(&self.initial_density)?.unwrap_or_else(|| net.roads().iter().map(|r| vec![0.0; r.cells]).collect());
        match expand(&self.initial_speed)? {
            Some(v) => TrafficState::new(net, rho, v),
            None => TrafficState::equilibrium(net, rho),
        }
    }
}
