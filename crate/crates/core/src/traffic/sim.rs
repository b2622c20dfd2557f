use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{fundamental_diagram, RoadNetwork};
use crate::{Error, Result};

/// Cells above which edge updates run in parallel.
const PARALLEL_CELLS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficState {
    pub rho: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
}

impl TrafficState {
    /// Density profile with speeds on the fundamental diagram.
    pub fn equilibrium(net: &RoadNetwork, rho: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(net, &rho)?;
        let v = rho
            .iter()
            .zip(net.roads())
            .map(|(r, p)| r.iter().map(|&x| fundamental_diagram(x, p)).collect())
            .collect();
        Ok(Self { rho, v, step: 0 })
    }

    pub fn new(net: &RoadNetwork, rho: Vec<Vec<f64>>, v: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(net, &rho)?;
        check_shape(net, &v)?;
        if rho.iter().chain(&v).flatten().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("densities and speeds must be finite and nonnegative".into()));
        }
        Ok(Self { rho, v, step: 0 })
    }

    pub fn time(&self, net: &RoadNetwork) -> f64 {
        self.step as f64 * net.global().dt
    }
}

fn check_shape(net: &RoadNetwork, a: &[Vec<f64>]) -> Result<()> {
    if a.len() != net.roads().len() || a.iter().zip(net.roads()).any(|(r, p)| r.len() != p.cells) {
        return Err(Error::GridMismatch("state arrays must match N_e on every edge".into()));
    }
    Ok(())
}

/// Inflow per source edge, in vehicles per time unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemandProfile {
    Constant { constant: f64 },
    /// One value per step; zero after the series ends.
    Series { series: Vec<f64> },
}

impl DemandProfile {
    pub fn at(&self, step: u64) -> f64 {
        match self {
            DemandProfile::Constant { constant } => *constant,
            DemandProfile::Series { series } => series.get(step as usize).copied().unwrap_or(0.0),
        }
    }
}

/// Virtual values `q(k, 0)`, `v(k, 0)` and `ρ(k, N_e + 1)` of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Virtual {
    pub q_in: f64,
    pub v_in: f64,
    pub rho_down: f64,
    /// Outflow withheld this step (red light or no turning mass).
    pub blocked: bool,
}

/// Forces `v(N_e) = 0` on edges that are red at the current step and
/// returns the red mask.
pub fn set_signals(net: &RoadNetwork, state: &mut TrafficState) -> Vec<bool> {
    let red = net.red_edges(state.step);
    for (j, &r) in red.iter().enumerate() {
        if r {
            if let Some(last) = state.v[j].last_mut() {
                *last = 0.0;
            }
        }
    }
    red
}

/// Virtual values for every edge given the red mask; also returns the edges
/// whose flux is held for lack of turning mass.
pub fn boundary_values(
    net: &RoadNetwork,
    state: &TrafficState,
    red: &[bool],
    demand: &[Option<DemandProfile>],
) -> (Vec<Virtual>, Vec<usize>) {
    let g = net.graph().digraph();
    let m = g.edge_count();
    let roads = net.roads();
    let out_flux: Vec<f64> =
        (0..m).map(|j| state.rho[j].last().unwrap() * state.v[j].last().unwrap() * roads[j].lanes as f64).collect();
    let mut q_in = vec![0.0; m];
    let mut vq_in = vec![0.0; m];
    let mut cap_in = vec![0.0; m];
    let mut held = Vec::new();
    for i in 0..m {
        if red[i] || net.is_sink(i) {
            continue;
        }
        if net.weight_sum[i] == 0.0 {
            if out_flux[i] != 0.0 {
                held.push(i);
            }
            continue;
        }
        let q = out_flux[i];
        let v = *state.v[i].last().unwrap();
        for (&(k, share), &factor) in net.shares[i].iter().zip(&net.cap_factor[i]) {
            q_in[k] += q * share;
            vq_in[k] += v * q * share;
            cap_in[k] += roads[i].v_max * factor * q * share;
        }
    }
    let values = (0..m)
        .map(|j| {
            let (q, v_in) = if net.is_source(j) {
                let q = demand.get(j).and_then(|d| d.as_ref()).map_or(0.0, |d| d.at(state.step));
                (q, state.v[j][0])
            } else if q_in[j] > 0.0 {
                (q_in[j], (vq_in[j] / q_in[j]).min(cap_in[j] / q_in[j]))
            } else {
                (q_in[j], state.v[j][0])
            };
            let last_rho = *state.rho[j].last().unwrap();
            let rho_down = if net.shares[j].is_empty() {
                last_rho
            } else {
                let lanes = roads[j].lanes as f64;
                net.shares[j].iter().map(|&(k, s)| s * state.rho[k][0] * roads[k].lanes as f64 / lanes).sum()
            };
            let blocked = red[j] || held.contains(&j);
            Virtual { q_in: q, v_in, rho_down, blocked }
        })
        .collect();
    (values, held)
}

/// Virtual values of the edges incident to `vertex` at the current state,
/// as `(edge, values)` pairs.
pub fn intersection_coupling(net: &RoadNetwork, state: &TrafficState, vertex: usize) -> Vec<(usize, Virtual)> {
    let g = net.graph().digraph();
    let red = net.red_edges(state.step);
    let (values, _) = boundary_values(net, state, &red, &[]);
    let mut edges: Vec<usize> = g.in_edges(vertex).iter().chain(g.out_edges(vertex)).copied().collect();
    edges.sort_unstable();
    edges.dedup();
    edges.into_iter().map(|j| (j, values[j])).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepReport {
    /// Edges whose flux was held because their turning weights sum to zero.
    pub held: Vec<usize>,
    pub clamped: u64,
    pub inflow: Vec<f64>,
}

/// One explicit step of the discretised Payne–Whitham system.
pub fn step(net: &RoadNetwork, state: &mut TrafficState, demand: &[Option<DemandProfile>]) -> Result<StepReport> {
    let red = set_signals(net, state);
    let (virt, held) = boundary_values(net, state, &red, demand);
    let gp = *net.global();
    let (dt, ds) = (gp.dt, gp.ds);
    let roads = net.roads();

    let update = |j: usize, rho: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>, u64) {
        let p = &roads[j];
        let lanes = p.lanes as f64;
        let bv = virt[j];
        let n = rho.len();
        let mut nr = vec![0.0; n];
        let mut nv = vec![0.0; n];
        let mut clamped = 0;
        for c in 0..n {
            let q_prev = if c == 0 { bv.q_in } else { rho[c - 1] * v[c - 1] * lanes };
            let q_here = if c == n - 1 && bv.blocked { 0.0 } else { rho[c] * v[c] * lanes };
            let v_prev = if c == 0 { bv.v_in } else { v[c - 1] };
            let rho_next = if c == n - 1 { bv.rho_down } else { rho[c + 1] };
            let mut r = rho[c] - dt / (lanes * ds) * (q_here - q_prev);
            let mut s = v[c] - dt * (v[c] * v[c] - v_prev * v_prev) / (2.0 * ds)
                + dt * (fundamental_diagram(rho_next, p) - v[c]) / gp.nu
                - dt * gp.c / (rho[c] + gp.chi) * (rho_next - rho[c]) / ds;
            if r < 0.0 {
                r = 0.0;
                clamped += 1;
            }
            if s < 0.0 {
                s = 0.0;
                clamped += 1;
            }
            nr[c] = r;
            nv[c] = s;
        }
        (nr, nv, clamped)
    };

    let total_cells: usize = roads.iter().map(|r| r.cells).sum();
    let results: Vec<(Vec<f64>, Vec<f64>, u64)> = if total_cells >= PARALLEL_CELLS {
        (0..roads.len()).into_par_iter().map(|j| update(j, &state.rho[j], &state.v[j])).collect()
    } else {
        (0..roads.len()).map(|j| update(j, &state.rho[j], &state.v[j])).collect()
    };
    let mut clamped = 0;
    for (j, (r, v, c)) in results.into_iter().enumerate() {
        state.rho[j] = r;
        state.v[j] = v;
        clamped += c;
    }
    state.step += 1;
    if state.rho.iter().chain(&state.v).flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState(state.step));
    }
    Ok(StepReport { held, clamped, inflow: virt.iter().map(|b| b.q_in).collect() })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EdgeStats {
    pub density: f64,
    pub speed: f64,
    pub flux: f64,
    /// Virtual inflow `q(k, 0)` used in the step that produced this sample.
    pub inflow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub step: u64,
    pub time: f64,
    pub vehicles: f64,
    pub edges: Vec<EdgeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Telemetry {
    pub frames: Vec<Frame>,
    /// Negative densities or speeds reset to zero.
    pub clamp_events: u64,
    /// `(step, edge)` pairs whose flux was held for lack of turning mass.
    pub held_events: Vec<(u64, usize)>,
    #[serde(skip)]
    pub final_state: TrafficState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub sample_every: u64,
    /// Skip the default CFL bound.
    pub allow_cfl_override: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { sample_every: 1, allow_cfl_override: false }
    }
}

fn frame(net: &RoadNetwork, state: &TrafficState, inflow: &[f64]) -> Frame {
    let edges = (0..net.roads().len())
        .map(|j| {
            let (r, v) = (&state.rho[j], &state.v[j]);
            let n = r.len() as f64;
            let lanes = net.roads()[j].lanes as f64;
            EdgeStats {
                density: r.iter().sum::<f64>() / n,
                speed: v.iter().sum::<f64>() / n,
                flux: r.iter().zip(v).map(|(a, b)| a * b * lanes).sum::<f64>() / n,
                inflow: inflow.get(j).copied().unwrap_or(0.0),
            }
        })
        .collect();
    Frame { step: state.step, time: state.time(net), vehicles: net.vehicles(&state.rho), edges }
}

/// Steps from `initial` to `t_end` (a whole number of steps).
pub fn run(
    net: &RoadNetwork,
    initial: TrafficState,
    demand: &[Option<DemandProfile>],
    t_end: f64,
    opts: RunOptions,
) -> Result<Telemetry> {
    let dt = net.global().dt;
    let limit = net.cfl_limit();
    if !opts.allow_cfl_override && dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let steps = (t_end / dt).round();
    if !(steps >= 0.0) || (steps * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::GridMismatch(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    if let Some(j) = (0..demand.len()).find(|&j| demand[j].is_some() && !net.is_source(j)) {
        return Err(Error::InvalidParams(format!("demand on edge {} which is not a source road", j + 1)));
    }
    let steps = steps as u64;
    let every = opts.sample_every.max(1);
    let mut state = initial;
    let mut tel = Telemetry {
        frames: vec![frame(net, &state, &[])],
        clamp_events: 0,
        held_events: Vec::new(),
        final_state: state.clone(),
    };
    for s in 1..=steps {
        let rep = step(net, &mut state, demand)?;
        tel.clamp_events += rep.clamped;
        tel.held_events.extend(rep.held.iter().map(|&j| (state.step - 1, j)));
        if s % every == 0 || s == steps {
            tel.frames.push(frame(net, &state, &rep.inflow));
        }
    }
    tel.final_state = state;
    Ok(tel)
}
