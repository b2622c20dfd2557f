use serde::{Deserialize, Serialize};

use crate::graph::{MetricGraph, PlanarEmbedding};
use crate::{Error, Result};

/// Tolerance for `δs·N_e = length` and for phase durations in whole steps.
const GRID_TOL: f64 = 1e-9;

/// Per-road parameters of the fundamental diagram and the discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadParams {
    pub lanes: u32,
    /// Segment count `N_e`.
    #[serde(rename = "N")]
    pub cells: usize,
    pub v_max: f64,
    pub rho_cr: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    /// Relaxation time ν.
    pub nu: f64,
    /// Anticipation strength C.
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(default = "default_chi")]
    pub chi: f64,
    pub dt: f64,
    pub ds: f64,
}

fn default_chi() -> f64 {
    1e-3
}

/// `ω(from, to)`: share of the cars leaving edge `from` that continue on `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turning {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPhase {
    /// Incoming edges with a green light; all other incoming edges are red.
    pub green: Vec<usize>,
    /// Phase length in time units, a whole number of steps.
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPlan {
    pub vertex: usize,
    pub plan: Vec<SignalPhase>,
}

/// How the geometric factor `(1 − cos θ)/2` of the turn-speed cap reads the
/// angle between two roads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleConvention {
    /// θ between the reversed incoming direction and the outgoing direction:
    /// straight on gives θ = π and factor 1, a U-turn factor 0.
    #[default]
    Heading,
    /// θ is the turning angle: straight on gives factor 0.
    Turning,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompiledSignal {
    pub vertex: usize,
    /// `(steps, green mask over edges)` per phase.
    pub phases: Vec<(u64, Vec<bool>)>,
    pub cycle: u64,
}

/// Embedded road network with all model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    graph: MetricGraph,
    embedding: PlanarEmbedding,
    roads: Vec<RoadParams>,
    global: GlobalParams,
    /// Per incoming edge: `(outgoing edge, normalised share)`; empty when
    /// the head vertex has no outgoing edges or all weights are zero.
    pub(crate) shares: Vec<Vec<(usize, f64)>>,
    /// Raw weight sum per edge, zero when no turning mass is declared.
    pub(crate) weight_sum: Vec<f64>,
    /// Geometric cap factor for each `(incoming, outgoing)` pair in `shares`.
    pub(crate) cap_factor: Vec<Vec<f64>>,
    pub(crate) signals: Vec<CompiledSignal>,
}

impl RoadNetwork {
    /// `turning` lists `ω` for chosen pairs; an incoming edge without any
    /// entry splits uniformly over the outgoing edges at its head.
    pub fn new(
        graph: MetricGraph,
        embedding: PlanarEmbedding,
        roads: Vec<RoadParams>,
        global: GlobalParams,
        turning: &[Turning],
        signals: &[SignalPlan],
        convention: AngleConvention,
    ) -> Result<Self> {
        let g = graph.digraph();
        let m = g.edge_count();
        if roads.len() != m {
            return Err(Error::DimMismatch(format!("{} road records for {m} edges", roads.len())));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if ![global.nu, global.c, global.chi, global.dt, global.ds].into_iter().all(positive) {
            return Err(Error::InvalidParams("nu, C, chi, dt and ds must be positive".into()));
        }
        for (j, r) in roads.iter().enumerate() {
            if r.lanes == 0 || r.cells == 0 || ![r.v_max, r.rho_cr, r.a].into_iter().all(positive) {
                return Err(Error::InvalidParams(format!("road {} has a non-positive parameter", j + 1)));
            }
            let len = graph.lengths()[j];
            if (global.ds * r.cells as f64 - len).abs() > GRID_TOL * len.max(1.0) {
                return Err(Error::GridMismatch(format!(
                    "road {}: ds·N = {} but the length is {len}",
                    j + 1,
                    global.ds * r.cells as f64
                )));
            }
        }

        let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for t in turning {
            if t.from >= m || t.to >= m {
                return Err(Error::InvalidParams(format!("turning {}→{} names a missing edge", t.from + 1, t.to + 1)));
            }
            if g.edge(t.from).head != g.edge(t.to).tail {
                return Err(Error::InvalidParams(format!("edges {} and {} do not meet", t.from + 1, t.to + 1)));
            }
            if !(t.weight >= 0.0 && t.weight.is_finite()) {
                return Err(Error::InvalidWeights(format!("turning weight {}", t.weight)));
            }
            match weights[t.from].iter_mut().find(|(k, _)| *k == t.to) {
                Some(entry) => entry.1 = t.weight,
                None => weights[t.from].push((t.to, t.weight)),
            }
        }
        let mut shares = vec![Vec::new(); m];
        let mut weight_sum = vec![0.0; m];
        let mut cap_factor = vec![Vec::new(); m];
        for i in 0..m {
            let outs = g.out_edges(g.edge(i).head);
            let w: Vec<(usize, f64)> =
                if weights[i].is_empty() { outs.iter().map(|&k| (k, 1.0)).collect() } else { weights[i].clone() };
            let total: f64 = w.iter().map(|x| x.1).sum();
            weight_sum[i] = total;
            if total > 0.0 {
                shares[i] = w.iter().filter(|x| x.1 > 0.0).map(|&(k, x)| (k, x / total)).collect();
                cap_factor[i] = shares[i].iter().map(|&(k, _)| turn_factor(&graph, &embedding, i, k, convention)).collect();
            }
        }

        let compiled = signals
            .iter()
            .map(|s| compile_signal(&graph, s, global.dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { graph, embedding, roads, global, shares, weight_sum, cap_factor, signals: compiled })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn embedding(&self) -> &PlanarEmbedding {
        &self.embedding
    }

    pub fn roads(&self) -> &[RoadParams] {
        &self.roads
    }

    pub fn global(&self) -> &GlobalParams {
        &self.global
    }

    /// Edges whose tail has no incoming edges.
    pub fn is_source(&self, j: usize) -> bool {
        let g = self.graph.digraph();
        g.in_edges(g.edge(j).tail).is_empty()
    }

    /// Edges whose head has no outgoing edges.
    pub fn is_sink(&self, j: usize) -> bool {
        let g = self.graph.digraph();
        g.out_edges(g.edge(j).head).is_empty()
    }

    /// Default stability bound `0.5·δs / max v_max`.
    pub fn cfl_limit(&self) -> f64 {
        let vmax = self.roads.iter().map(|r| r.v_max).fold(0.0, f64::max);
        0.5 * self.global.ds / vmax
    }

    /// Red incoming edges at step `k`.
    pub fn red_edges(&self, k: u64) -> Vec<bool> {
        let mut red = vec![false; self.graph.digraph().edge_count()];
        let g = self.graph.digraph();
        for s in &self.signals {
            let mut t = k % s.cycle;
            let mut green = &s.phases[0].1;
            for (steps, mask) in &s.phases {
                if t < *steps {
                    green = mask;
                    break;
                }
                t -= steps;
            }
            for &j in g.in_edges(s.vertex) {
                red[j] = !green[j];
            }
        }
        red
    }

    /// Number of vehicles `Σ ρ·δs·ℓ`.
    pub fn vehicles(&self, rho: &[Vec<f64>]) -> f64 {
        rho.iter().zip(&self.roads).map(|(r, p)| r.iter().sum::<f64>() * self.global.ds * p.lanes as f64).sum()
    }
}

/// `V(ρ) = v_max·exp(−(ρ/ρ_cr)^a / a)`.
pub fn fundamental_diagram(rho: f64, p: &RoadParams) -> f64 {
    p.v_max * (-(rho.max(0.0) / p.rho_cr).powf(p.a) / p.a).exp()
}

fn turn_factor(graph: &MetricGraph, emb: &PlanarEmbedding, from: usize, to: usize, conv: AngleConvention) -> f64 {
    let g = graph.digraph();
    let v = emb.point(g.edge(from).head);
    let back = emb.point(g.edge(from).tail);
    let ahead = emb.point(g.edge(to).head);
    let u = [back[0] - v[0], back[1] - v[1]];
    let w = [ahead[0] - v[0], ahead[1] - v[1]];
    let (nu, nw) = (u[0].hypot(u[1]), w[0].hypot(w[1]));
    // loops have no direction at the vertex; treat them as straight on
    let cos = if nu == 0.0 || nw == 0.0 { -1.0 } else { ((u[0] * w[0] + u[1] * w[1]) / (nu * nw)).clamp(-1.0, 1.0) };
    match conv {
        AngleConvention::Heading => (1.0 - cos) / 2.0,
        AngleConvention::Turning => (1.0 + cos) / 2.0,
    }
}

fn compile_signal(graph: &MetricGraph, s: &SignalPlan, dt: f64) -> Result<CompiledSignal> {
    let g = graph.digraph();
    if s.vertex >= g.vertex_count() {
        return Err(Error::InvalidParams(format!("signal at missing vertex {}", s.vertex + 1)));
    }
    if s.plan.is_empty() {
        return Err(Error::InvalidParams(format!("signal at vertex {} has no phases", s.vertex + 1)));
    }
    let incoming = g.in_edges(s.vertex);
    let mut phases = Vec::with_capacity(s.plan.len());
    for p in &s.plan {
        let steps = (p.duration / dt).round();
        if !(steps >= 1.0) || (steps * dt - p.duration).abs() > GRID_TOL * p.duration.max(1.0) {
            return Err(Error::GridMismatch(format!("phase duration {} is not a whole number of steps", p.duration)));
        }
        let mut mask = vec![false; g.edge_count()];
        for &e in &p.green {
            if !incoming.contains(&e) {
                return Err(Error::InvalidParams(format!("edge {} does not enter vertex {}", e + 1, s.vertex + 1)));
            }
            mask[e] = true;
        }
        phases.push((steps as u64, mask));
    }
    let cycle = phases.iter().map(|p| p.0).sum();
    Ok(CompiledSignal { vertex: s.vertex, phases, cycle })
}
