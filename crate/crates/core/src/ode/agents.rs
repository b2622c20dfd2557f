use nalgebra::{DMatrix, DVector};

use super::LinearizedNetwork;
use crate::graph::{operator_suite, Digraph};
use crate::{Error, Result};

/// Dynamics of one agent: internal field F, gain K, coupling H and output Q.
pub trait AgentModel: Send + Sync {
    /// State dimension p.
    fn state_dim(&self) -> usize;
    /// Output dimension q.
    fn output_dim(&self) -> usize;
    /// Coupling dimension r.
    fn coupling_dim(&self) -> usize;
    fn field(&self, x: &[f64]) -> DVector<f64>;
    /// p×r gain matrix K(x).
    fn gain(&self, x: &[f64]) -> DMatrix<f64>;
    fn coupling(&self, y: &[f64]) -> DVector<f64>;
    fn output(&self, x: &[f64]) -> DVector<f64>;

    /// B = J_F(0) and D = K(0)·J_H(0)·J_Q(0), by central differences unless
    /// a model knows them exactly.
    fn linearization(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let (p, q) = (self.state_dim(), self.output_dim());
        let b = central_jacobian(|x| self.field(x), p, p);
        let jq = central_jacobian(|x| self.output(x), p, q);
        let jh = central_jacobian(|y| self.coupling(y), q, self.coupling_dim());
        let k0 = self.gain(&vec![0.0; p]);
        (b, k0 * jh * jq)
    }
}

fn central_jacobian(f: impl Fn(&[f64]) -> DVector<f64>, n_in: usize, n_out: usize) -> DMatrix<f64> {
    let h = 1e-6;
    let mut jac = DMatrix::zeros(n_out, n_in);
    let mut x = vec![0.0; n_in];
    for k in 0..n_in {
        x[k] = h;
        let plus = f(&x);
        x[k] = -h;
        let minus = f(&x);
        x[k] = 0.0;
        jac.set_column(k, &((plus - minus) / (2.0 * h)));
    }
    jac
}

/// Scalar agents with F = 0 and K = H = Q = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleIntegrator;

impl AgentModel for SingleIntegrator {
    fn state_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn coupling_dim(&self) -> usize {
        1
    }
    fn field(&self, _x: &[f64]) -> DVector<f64> {
        DVector::zeros(1)
    }
    fn gain(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(1, 1)
    }
    fn coupling(&self, y: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(y)
    }
    fn output(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }
    fn linearization(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (DMatrix::zeros(1, 1), DMatrix::identity(1, 1))
    }
}

/// Damped double integrator `χ'' = −T_s χ' + K_s u` with state (χ, χ'),
/// full-state output and scalar coupling `u = C1·Δχ + C2·Δχ'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleIntegrator {
    pub ts: f64,
    pub ks: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AgentModel for DoubleIntegrator {
    fn state_dim(&self) -> usize {
        2
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn coupling_dim(&self) -> usize {
        1
    }
    fn field(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![x[1], -self.ts * x[1]])
    }
    fn gain(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 1, &[0.0, self.ks])
    }
    fn coupling(&self, y: &[f64]) -> DVector<f64> {
        DVector::from_element(1, self.c1 * y[0] + self.c2 * y[1])
    }
    fn output(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }
    fn linearization(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, -self.ts]);
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, self.ks * self.c1, self.ks * self.c2]);
        (b, d)
    }
}

/// Linear agents `F(x) = Bx`, `K = I`, `H(y) = Dy`, `Q = id`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAgent {
    pub b: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl AgentModel for LinearAgent {
    fn state_dim(&self) -> usize {
        self.b.nrows()
    }
    fn output_dim(&self) -> usize {
        self.b.nrows()
    }
    fn coupling_dim(&self) -> usize {
        self.b.nrows()
    }
    fn field(&self, x: &[f64]) -> DVector<f64> {
        &self.b * DVector::from_column_slice(x)
    }
    fn gain(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.b.nrows(), self.b.nrows())
    }
    fn coupling(&self, y: &[f64]) -> DVector<f64> {
        &self.d * DVector::from_column_slice(y)
    }
    fn output(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }
    fn linearization(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.b.clone(), self.d.clone())
    }
}

/// Identical agents on the vertices of a digraph, coupled diffusively:
/// `x_i' = F(x_i) + K(x_i) Σ_k a⁺_ik H(Q(x_k) − Q(x_i))`, with `a⁺` the
/// unweighted in-adjacency.
pub struct AgentNetwork {
    adjacency: DMatrix<f64>,
    laplacian: DMatrix<f64>,
    model: Box<dyn AgentModel>,
}

impl std::fmt::Debug for AgentNetwork {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AgentNetwork")
            .field("agents", &self.agents())
            .field("state_dim", &self.model.state_dim())
            .finish()
    }
}

impl AgentNetwork {
    pub fn new(graph: &Digraph, model: Box<dyn AgentModel>) -> Result<Self> {
        let (p, q, r) = (model.state_dim(), model.output_dim(), model.coupling_dim());
        if p == 0 || q == 0 || r == 0 {
            return Err(Error::DimMismatch("agent dimensions must be positive".into()));
        }
        let zero = vec![0.0; p];
        let f0 = model.field(&zero);
        let q0 = model.output(&zero);
        let k0 = model.gain(&zero);
        let h0 = model.coupling(&vec![0.0; q]);
        if f0.len() != p || q0.len() != q || k0.shape() != (p, r) || h0.len() != r {
            return Err(Error::DimMismatch(format!(
                "declared (p, q, r) = ({p}, {q}, {r}) but F, Q, K, H return {}, {}, {:?}, {}",
                f0.len(),
                q0.len(),
                k0.shape(),
                h0.len()
            )));
        }
        if f0.amax() > 1e-12 || q0.amax() > 1e-12 {
            return Err(Error::InvalidParams("F(0) and Q(0) must vanish".into()));
        }
        let ops = operator_suite(graph);
        Ok(Self {
            adjacency: ops.adj_in_unweighted,
            laplacian: ops.kirchhoff_in_unweighted,
            model,
        })
    }

    pub fn agents(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn model(&self) -> &dyn AgentModel {
        self.model.as_ref()
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn linearize(&self) -> LinearizedNetwork {
        let (b, d) = self.model.linearization();
        LinearizedNetwork { b, d, laplacian: self.laplacian.clone() }
    }

    /// Full vector field on the stacked state of length n·p.
    pub fn vector_field(&self, x: &[f64]) -> Vec<f64> {
        let n = self.agents();
        let p = self.model.state_dim();
        let outputs: Vec<DVector<f64>> = (0..n).map(|i| self.model.output(&x[i * p..(i + 1) * p])).collect();
        let mut dx = vec![0.0; n * p];
        for i in 0..n {
            let xi = &x[i * p..(i + 1) * p];
            let mut acc = DVector::zeros(self.model.coupling_dim());
            for k in 0..n {
                let a = self.adjacency[(i, k)];
                if a != 0.0 {
                    let diff = &outputs[k] - &outputs[i];
                    acc += self.model.coupling(diff.as_slice()) * a;
                }
            }
            let v = self.model.field(xi) + self.model.gain(xi) * acc;
            dx[i * p..(i + 1) * p].copy_from_slice(v.as_slice());
        }
        dx
    }
}

/// Sampled states and outputs. `states[s]` stacks all agents (length n·p).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agents: usize,
    pub state_dim: usize,
    pub output_dim: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn output(&self, sample: usize, agent: usize) -> &[f64] {
        let q = self.output_dim;
        &self.outputs[sample][agent * q..(agent + 1) * q]
    }
}

/// Classical fourth-order Runge–Kutta with fixed step `dt`; the last step is
/// shortened to land on `t_end`. Every step is recorded.
pub fn simulate(net: &AgentNetwork, x0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let n = net.agents();
    let p = net.model.state_dim();
    if x0.len() != n * p {
        return Err(Error::DimMismatch(format!("initial state has {} entries, expected {}", x0.len(), n * p)));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParams(format!("dt = {dt}, t_end = {t_end}")));
    }
    let outputs_of = |x: &[f64]| -> Vec<f64> {
        (0..n).flat_map(|i| net.model.output(&x[i * p..(i + 1) * p]).iter().copied().collect::<Vec<_>>()).collect()
    };
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        agents: n,
        state_dim: p,
        output_dim: net.model.output_dim(),
        times: vec![0.0],
        states: vec![x0.to_vec()],
        outputs: vec![outputs_of(x0)],
    };
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    for s in 0..steps {
        let h = if s + 1 == steps { t_end - t } else { dt };
        let k1 = net.vector_field(&x);
        let k2 = net.vector_field(&axpy(&x, &k1, h / 2.0));
        let k3 = net.vector_field(&axpy(&x, &k2, h / 2.0));
        let k4 = net.vector_field(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = if s + 1 == steps { t_end } else { (s + 1) as f64 * dt };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t));
        }
        traj.times.push(t);
        traj.outputs.push(outputs_of(&x));
        traj.states.push(x.clone());
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub synchronized: bool,
    /// `(i, j, max ‖y_i − y_j‖)` over the trailing window, for i < j.
    pub pairs: Vec<(usize, usize, f64)>,
    pub max_deviation: f64,
}

/// Output synchronisation over the trailing time window of length `window`.
pub fn sync_check(traj: &Trajectory, tol: f64, window: f64) -> Result<SyncReport> {
    let t_last = *traj.times.last().expect("trajectory has a first sample");
    if window < 0.0 || window > t_last {
        return Err(Error::InvalidParams(format!(
            "window {window} is not within the trajectory length {t_last}"
        )));
    }
    let first = traj.times.iter().position(|&t| t >= t_last - window).unwrap_or(0);
    let n = traj.agents;
    let mut pairs = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m: f64 = 0.0;
            for s in first..traj.times.len() {
                let d = traj
                    .output(s, i)
                    .iter()
                    .zip(traj.output(s, j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                m = m.max(d);
            }
            worst = worst.max(m);
            pairs.push((i, j, m));
        }
    }
    Ok(SyncReport { synchronized: worst < tol, pairs, max_deviation: worst })
}
