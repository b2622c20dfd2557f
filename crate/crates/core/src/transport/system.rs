use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::graph::{line_graph_adjacency, Digraph, Edge, LineWeighting, MetricGraph, TravelTime};
use crate::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Edge velocity, kept exact when it is rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speed {
    value: f64,
    exact: Option<Ratio<i64>>,
}

impl Speed {
    pub fn rational(r: Ratio<i64>) -> Result<Self> {
        if *r.numer() <= 0 || *r.denom() <= 0 {
            return Err(Error::InvalidParams(format!("velocity {r} is not positive")));
        }
        Ok(Self { value: *r.numer() as f64 / *r.denom() as f64, exact: Some(r) })
    }

    /// A velocity known only in floating point (treated as irrational).
    pub fn real(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParams(format!("velocity {value} is not positive")));
        }
        Ok(Self { value, exact: None })
    }

    /// Rational when `value` equals a fraction with denominator at most
    /// 10⁶, real otherwise.
    pub fn from_f64(value: f64) -> Result<Self> {
        match exact_ratio(value) {
            Some(r) => Self::rational(r),
            None => Self::real(value),
        }
    }

    /// Parses `"p/q"`, `"p"` or a decimal number.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Ok(r) = text.parse::<Ratio<i64>>() {
            return Self::rational(r);
        }
        let v: f64 = text.parse().map_err(|_| Error::InvalidParams(format!("cannot parse velocity {text:?}")))?;
        Self::from_f64(v)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    pub fn travel_time(&self) -> TravelTime {
        match self.exact {
            Some(r) => TravelTime::Rational(r.recip()),
            None => TravelTime::Irrational,
        }
    }

    fn per_length(self, length: f64) -> Result<Self> {
        if length == 1.0 {
            return Ok(self);
        }
        match (self.exact, exact_ratio(length)) {
            (Some(c), Some(l)) => Self::rational(c / l),
            _ => Self::real(self.value / length),
        }
    }
}

/// First continued-fraction convergent `p/q` with `q ≤ 10⁶` that rounds
/// to exactly `x`.
fn exact_ratio(x: f64) -> Option<Ratio<i64>> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let (p2, q2) = (a as i64 * p1 + p0, a as i64 * q1 + q0);
        if q2 > 1_000_000 {
            return None;
        }
        if p2 as f64 / q2 as f64 == x {
            return Some(Ratio::new(p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

impl Serialize for Speed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.exact {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Speed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let speed = match Raw::deserialize(d)? {
            Raw::Number(v) => Speed::from_f64(v),
            Raw::Text(t) => Speed::parse(&t),
        };
        speed.map_err(serde::de::Error::custom)
    }
}

/// Advection `∂_t u_j = c_j ∂_s u_j` on unit edges, flowing from s = 1 to
/// s = 0. Mass leaving edge k at s = 0 enters edge j at s = 1 with fraction
/// `transfer[(j, k)]`; every column of `transfer` sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSystem {
    speeds: Vec<Speed>,
    transfer: DMatrix<f64>,
    successors: Vec<Vec<(usize, f64)>>,
}

impl TransportSystem {
    /// System on a metric graph with boundary weights `w_j` summing to one
    /// over the outgoing edges of every vertex. Lengths are folded into the
    /// velocities.
    pub fn on_graph(graph: &MetricGraph, speeds: &[Speed], weights: &[f64]) -> Result<Self> {
        let g = graph.digraph();
        let m = g.edge_count();
        if speeds.len() != m || weights.len() != m {
            return Err(Error::DimMismatch(format!(
                "{} velocities and {} weights for {m} edges",
                speeds.len(),
                weights.len()
            )));
        }
        if let Some(j) = weights.iter().position(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::InvalidWeights(format!("weight of edge {} is {} (must lie in (0, 1])", j + 1, weights[j])));
        }
        for v in 0..g.vertex_count() {
            let outs = g.out_edges(v);
            if outs.is_empty() {
                if !g.in_edges(v).is_empty() {
                    return Err(Error::InvalidGraph(format!("vertex {} is a sink", v + 1)));
                }
                continue;
            }
            let sum: f64 = outs.iter().map(|&j| weights[j]).sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidWeights(format!("outgoing weights at vertex {} sum to {sum}", v + 1)));
            }
        }
        let weighted = g.with_weights(weights)?;
        let transfer = line_graph_adjacency(&weighted, LineWeighting::Out);
        let speeds = speeds
            .iter()
            .zip(graph.lengths())
            .map(|(s, &l)| s.per_length(l))
            .collect::<Result<Vec<_>>>()?;
        Self::from_transfer(speeds, transfer)
    }

    /// System given directly by its edge-to-edge transfer matrix.
    pub fn from_transfer(speeds: Vec<Speed>, transfer: DMatrix<f64>) -> Result<Self> {
        let m = speeds.len();
        if transfer.shape() != (m, m) || m == 0 {
            return Err(Error::DimMismatch(format!("transfer {:?} for {m} edges", transfer.shape())));
        }
        if transfer.iter().any(|&x| !(x >= 0.0) || x > 1.0) {
            return Err(Error::InvalidWeights("transfer fractions must lie in [0, 1]".into()));
        }
        let mut successors = vec![Vec::new(); m];
        for k in 0..m {
            let sum: f64 = transfer.column(k).sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidWeights(format!("outflow of edge {} is split into fractions summing to {sum}", k + 1)));
            }
            for j in 0..m {
                if transfer[(j, k)] > 0.0 {
                    successors[k].push((j, transfer[(j, k)]));
                }
            }
        }
        Ok(Self { speeds, transfer, successors })
    }

    pub fn edge_count(&self) -> usize {
        self.speeds.len()
    }

    pub fn speeds(&self) -> &[Speed] {
        &self.speeds
    }

    pub fn speed_values(&self) -> Vec<f64> {
        self.speeds.iter().map(|s| s.value).collect()
    }

    /// Column-stochastic transfer matrix.
    pub fn transfer(&self) -> &DMatrix<f64> {
        &self.transfer
    }

    /// `(j, fraction)` for every edge fed by edge `k`.
    pub fn successors(&self, k: usize) -> &[(usize, f64)] {
        &self.successors[k]
    }

    /// `B_C = C⁻¹ · transfer · C`, the boundary matrix in `g(1) = B_C g(0)`.
    pub fn boundary_matrix(&self) -> DMatrix<f64> {
        let c = self.speed_values();
        DMatrix::from_fn(self.edge_count(), self.edge_count(), |j, k| self.transfer[(j, k)] * c[k] / c[j])
    }

    /// Digraph on the edges with an arc `k -> j` whenever `k` feeds `j`.
    pub fn transfer_digraph(&self) -> Digraph {
        let edges = self
            .successors
            .iter()
            .enumerate()
            .flat_map(|(k, s)| s.iter().map(move |&(j, w)| Edge::new(k, j, w)))
            .collect();
        Digraph::new(self.edge_count(), edges).expect("transfer arcs are distinct")
    }

    pub fn all_rational(&self) -> bool {
        self.speeds.iter().all(|s| s.exact.is_some())
    }

    /// Sum of all edge traversal times.
    pub fn traversal_time(&self) -> f64 {
        self.speeds.iter().map(|s| 1.0 / s.value).sum()
    }
}

/// Cell averages on a uniform grid of `cells` cells per edge; cell 0 is
/// adjacent to s = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeField {
    pub cells: usize,
    pub values: Vec<Vec<f64>>,
}

impl EdgeField {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let cells = values.first().map_or(0, |v| v.len());
        if cells == 0 || values.iter().any(|v| v.len() != cells) {
            return Err(Error::GridMismatch("every edge needs the same positive number of cells".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial data must be finite".into()));
        }
        Ok(Self { cells, values })
    }

    pub fn constant(edges: usize, cells: usize, value: f64) -> Self {
        Self { cells, values: vec![vec![value; cells]; edges] }
    }

    /// Cell averages of `sin²(πs)` on every edge.
    pub fn bump(edges: usize, cells: usize) -> Self {
        let h = 1.0 / cells as f64;
        let pi = std::f64::consts::PI;
        let row: Vec<f64> = (0..cells)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                // ∫ sin²(πs) ds = s/2 − sin(2πs)/(4π)
                ((b - a) / 2.0 - ((2.0 * pi * b).sin() - (2.0 * pi * a).sin()) / (4.0 * pi)) / h
            })
            .collect();
        Self { cells, values: vec![row; edges] }
    }

    pub fn edges(&self) -> usize {
        self.values.len()
    }

    pub fn edge_mass(&self, j: usize) -> f64 {
        self.values[j].iter().sum::<f64>() / self.cells as f64
    }

    /// `Σ_j ∫₀¹ u_j ds`.
    pub fn mass(&self) -> f64 {
        (0..self.edges()).map(|j| self.edge_mass(j)).sum()
    }

    pub fn max_abs_diff(&self, other: &EdgeField) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
