use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use super::spectrum::equilateral_spectrum;
use crate::graph::MetricGraph;
use crate::transport::EdgeField;
use crate::{Error, Result};

/// Kirchhoff Laplacian `u ↦ u″` with continuity and zero outgoing flux sum
/// at every vertex, or `u = 0` on the Dirichlet vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffLaplacian {
    graph: MetricGraph,
    dirichlet: Vec<usize>,
}

impl KirchhoffLaplacian {
    pub fn new(graph: MetricGraph) -> Self {
        Self { graph, dirichlet: Vec::new() }
    }

    pub fn with_dirichlet(graph: MetricGraph, mut exterior: Vec<usize>) -> Result<Self> {
        exterior.sort_unstable();
        exterior.dedup();
        if let Some(&v) = exterior.iter().find(|&&v| v >= graph.digraph().vertex_count()) {
            return Err(Error::InvalidGraph(format!("Dirichlet vertex {} out of range", v + 1)));
        }
        Ok(Self { graph, dirichlet: exterior })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn dirichlet(&self) -> &[usize] {
        &self.dirichlet
    }

    /// `Σ_j ∫ u_j ds` for cell averages on this graph.
    pub fn mass(&self, f: &EdgeField) -> f64 {
        let lengths = self.graph.lengths();
        (0..f.edges()).map(|j| lengths[j] * f.values[j].iter().sum::<f64>() / f.cells as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub frames: Vec<EdgeField>,
}

/// Implicit Euler for the finite-volume heat equation; the vertex values are
/// algebraic unknowns eliminated in the same solve.
#[derive(Debug, Clone)]
pub struct HeatSolver {
    m: usize,
    cells: usize,
    capacity: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
    state: DVector<f64>,
    dt: f64,
    time: f64,
}

impl HeatSolver {
    pub fn new(lap: &KirchhoffLaplacian, f: &EdgeField, dt: f64) -> Result<Self> {
        if !lap.dirichlet.is_empty() {
            return Err(Error::InvalidParams("heat evolution needs an empty Dirichlet set".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt = {dt}")));
        }
        let g = lap.graph.digraph();
        let m = g.edge_count();
        if f.edges() != m {
            return Err(Error::GridMismatch(format!("{} edge rows for {m} edges", f.edges())));
        }
        let k = f.cells;
        let n = g.vertex_count();
        let size = m * k + n;
        let mut a = DMatrix::zeros(size, size);
        let mut capacity = vec![0.0; m * k];
        let mut link = |p: usize, q: usize, c: f64| {
            a[(p, p)] += c;
            a[(q, q)] += c;
            a[(p, q)] -= c;
            a[(q, p)] -= c;
        };
        for (j, e) in g.edges().iter().enumerate() {
            let h = lap.graph.lengths()[j] / k as f64;
            for c in 0..k {
                capacity[j * k + c] = h;
            }
            for c in 0..k - 1 {
                link(j * k + c, j * k + c + 1, 1.0 / h);
            }
            link(j * k, m * k + e.tail, 2.0 / h);
            link(j * k + k - 1, m * k + e.head, 2.0 / h);
        }
        for v in 0..n {
            // isolated vertices carry no information
            if g.out_edges(v).is_empty() && g.in_edges(v).is_empty() {
                a[(m * k + v, m * k + v)] = 1.0;
            }
        }
        for (p, &c) in capacity.iter().enumerate() {
            a[(p, p)] += c / dt;
        }
        let chol = Cholesky::new(a).ok_or_else(|| Error::SingularAssembly("heat system is not positive definite".into()))?;
        let mut state = DVector::zeros(m * k);
        for j in 0..m {
            for c in 0..k {
                state[j * k + c] = f.values[j][c];
            }
        }
        Ok(Self { m, cells: k, capacity, chol, state, dt, time: 0.0 })
    }

    pub fn step(&mut self) {
        let size = self.chol.l_dirty().nrows();
        let mut rhs = DVector::zeros(size);
        for p in 0..self.state.len() {
            rhs[p] = self.capacity[p] / self.dt * self.state[p];
        }
        let x = self.chol.solve(&rhs);
        self.state = x.rows(0, self.state.len()).into_owned();
        self.time += self.dt;
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn field(&self) -> EdgeField {
        let k = self.cells;
        EdgeField { cells: k, values: (0..self.m).map(|j| self.state.as_slice()[j * k..(j + 1) * k].to_vec()).collect() }
    }

    fn max_deviation(&self, level: f64) -> f64 {
        self.state.iter().fold(0.0, |a, &u| a.max((u - level).abs()))
    }
}

pub fn default_dt(lap: &KirchhoffLaplacian) -> f64 {
    1e-3 * lap.graph.total_length().powi(2)
}

/// Runs to `t_end` with `dt` (default `1e−3·(total length)²`), shrunk so the
/// last step lands on `t_end`. Every `sample_every`-th state is kept.
pub fn heat_evolve(
    lap: &KirchhoffLaplacian,
    f: &EdgeField,
    t_end: f64,
    dt: Option<f64>,
    sample_every: usize,
) -> Result<HeatTrajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParams(format!("t_end = {t_end}")));
    }
    let dt0 = dt.unwrap_or_else(|| default_dt(lap));
    let steps = if t_end == 0.0 { 0 } else { (t_end / dt0 - 1e-9).ceil().max(1.0) as usize };
    let dt = if steps == 0 { dt0 } else { t_end / steps as f64 };
    let mut solver = HeatSolver::new(lap, f, dt)?;
    let every = sample_every.max(1);
    let mut traj = HeatTrajectory { dt, times: vec![0.0], frames: vec![solver.field()] };
    for s in 1..=steps {
        solver.step();
        if s % every == 0 || s == steps {
            traj.times.push(s as f64 * dt);
            traj.frames.push(solver.field());
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatAsymptotics {
    pub limit: f64,
    /// Fitted decay rate of `‖u(t) − limit‖∞`; `None` when the data is
    /// already constant.
    pub rate: Option<f64>,
    /// Smallest positive eigenvalue, for equilateral graphs.
    pub lambda2: Option<f64>,
    /// Time at which the deviation fell below the fit window.
    pub horizon: f64,
}

const FIT_UPPER: f64 = 1e-3;
const FIT_LOWER: f64 = 1e-8;
const MAX_STEPS: usize = 2_000_000;

/// Limit `mass / total length` and the exponential decay rate towards it,
/// fitted on the window where the deviation has dropped by 10³ to 10⁸.
pub fn heat_asymptotics(lap: &KirchhoffLaplacian, f: &EdgeField, dt: Option<f64>) -> Result<HeatAsymptotics> {
    let limit = lap.mass(f) / lap.graph.total_length();
    let lambda2 = match equilateral_spectrum(&lap.graph, 2) {
        Ok(s) => s.iter().find(|e| e.lambda > 1e-9).map(|e| e.lambda),
        Err(Error::NotEquilateral(_)) => None,
        Err(e) => return Err(e),
    };
    let dt = dt.unwrap_or_else(|| default_dt(lap));
    let mut solver = HeatSolver::new(lap, f, dt)?;
    let dev0 = solver.max_deviation(limit);
    if dev0 <= 1e-12 * limit.abs().max(1.0) {
        return Ok(HeatAsymptotics { limit, rate: None, lambda2, horizon: 0.0 });
    }
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..MAX_STEPS {
        solver.step();
        let dev = solver.max_deviation(limit);
        if dev < FIT_LOWER * dev0 {
            break;
        }
        if dev <= FIT_UPPER * dev0 {
            ts.push(solver.time());
            ys.push(dev.ln());
        }
    }
    let rate = (ts.len() >= 3).then(|| {
        let slope = least_squares_slope(&ts, &ys);
        // undo the implicit Euler damping factor 1/(1 + λ dt)
        ((-slope * dt).exp() - 1.0) / dt
    });
    Ok(HeatAsymptotics { limit, rate, lambda2, horizon: solver.time() })
}

pub(crate) fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
