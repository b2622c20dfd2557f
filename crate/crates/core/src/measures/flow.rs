use nalgebra::DMatrix;

use crate::graph::{component_labels, operator_suite, Digraph};
use crate::{Error, Result};

/// A digraph whose weights are flows, plus external exports per vertex.
#[derive(Debug, Clone)]
pub struct FlowSystem {
    digraph: Digraph,
    exports: Vec<f64>,
}

impl FlowSystem {
    pub fn new(digraph: Digraph, exports: Vec<f64>) -> Result<Self> {
        let n = digraph.vertex_count();
        if exports.len() != n {
            return Err(Error::DimMismatch(format!("{} exports for {n} vertices", exports.len())));
        }
        if let Some(i) = exports.iter().position(|&o| !(o >= 0.0 && o.is_finite())) {
            return Err(Error::InvalidParams(format!("export of vertex {} is {}", i + 1, exports[i])));
        }
        if exports.iter().all(|&o| o == 0.0) {
            return Err(Error::InvalidParams("all exports are zero".into()));
        }
        let fs = Self { digraph, exports };
        let h = fs.throughflow();
        if let Some(i) = h.iter().position(|&x| x <= 0.0) {
            return Err(Error::InvalidParams(format!("vertex {} has zero throughflow", i + 1)));
        }
        Ok(fs)
    }

    pub fn digraph(&self) -> &Digraph {
        &self.digraph
    }

    pub fn exports(&self) -> &[f64] {
        &self.exports
    }

    /// h_i = total outflow of i plus its export.
    pub fn throughflow(&self) -> Vec<f64> {
        let mut h = self.exports.clone();
        for e in self.digraph.edges() {
            h[e.tail] += e.weight;
        }
        h
    }

    /// Vertices from which no path reaches a vertex with positive export.
    /// Mass entering such a set never leaves, so I − C is singular.
    fn trapped_vertices(&self) -> Vec<usize> {
        let n = self.digraph.vertex_count();
        let mut drains = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| self.exports[i] > 0.0).collect();
        for &i in &stack {
            drains[i] = true;
        }
        while let Some(v) = stack.pop() {
            for &j in self.digraph.in_edges(v) {
                let t = self.digraph.edge(j).tail;
                if !drains[t] {
                    drains[t] = true;
                    stack.push(t);
                }
            }
        }
        (0..n).filter(|&i| !drains[i]).collect()
    }
}

/// Throughflow vector h, transition matrix C and overall transition matrix U.
#[derive(Debug, Clone)]
pub struct FlowAnalysis {
    pub throughflow: Vec<f64>,
    pub transition: DMatrix<f64>,
    pub overall: DMatrix<f64>,
}

/// `c_ij = a⁺_ij / h_j` and `U = (I − C)⁻¹`.
pub fn throughflow_transition(fs: &FlowSystem) -> Result<FlowAnalysis> {
    let trapped = fs.trapped_vertices();
    if !trapped.is_empty() {
        let list: Vec<String> = trapped.iter().map(|v| (v + 1).to_string()).collect();
        return Err(Error::SingularSystem(format!(
            "no export reachable from vertices {}",
            list.join(",")
        )));
    }
    let n = fs.digraph.vertex_count();
    let h = fs.throughflow();
    let a_in = operator_suite(&fs.digraph).adj_in;
    let c = DMatrix::from_fn(n, n, |i, j| a_in[(i, j)] / h[j]);
    let i_minus_c = DMatrix::identity(n, n) - &c;
    let u = i_minus_c
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("LU factorisation of I - C failed".into()))?;
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularSystem("inverse of I - C is not finite".into()));
    }
    Ok(FlowAnalysis { throughflow: h, transition: c, overall: u })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FciReport {
    pub per_node: Vec<f64>,
    /// Throughflow-weighted mean of the per-node values.
    pub system: f64,
}

/// Finn cycling index `(u_ii − 1) / u_ii`. A vertex on no directed cycle
/// has `u_ii = 1` exactly and is reported as 0 without rounding noise.
pub fn finn_cycling_index(fs: &FlowSystem) -> Result<FciReport> {
    let fa = throughflow_transition(fs)?;
    let on_cycle = vertices_on_cycles(fs.digraph());
    let per_node: Vec<f64> = (0..fs.digraph.vertex_count())
        .map(|i| {
            if on_cycle[i] {
                let u = fa.overall[(i, i)];
                (u - 1.0) / u
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = fa.throughflow.iter().sum();
    let system = per_node.iter().zip(&fa.throughflow).map(|(f, h)| f * h).sum::<f64>() / total;
    Ok(FciReport { per_node, system })
}

/// True for vertices in a non-trivial strong component or carrying a loop.
pub fn vertices_on_cycles(g: &Digraph) -> Vec<bool> {
    let labels = component_labels(g);
    let mut size = vec![0usize; g.vertex_count()];
    for &l in &labels {
        size[l] += 1;
    }
    let mut on = labels.iter().map(|&l| size[l] > 1).collect::<Vec<_>>();
    for e in g.edges() {
        if e.is_loop() {
            on[e.tail] = true;
        }
    }
    on
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReciprocityBasis {
    /// Flow matrix entries.
    #[default]
    Flows,
    /// Entries of the overall transition matrix U.
    Overall,
}

/// `Σ min(x_ij, x_ji) / Σ x_kl` over all ordered pairs, diagonal included.
/// Zero when the matrix is zero.
pub fn reciprocity(fs: &FlowSystem, basis: ReciprocityBasis) -> Result<f64> {
    let x = match basis {
        ReciprocityBasis::Flows => operator_suite(fs.digraph()).adj_in,
        ReciprocityBasis::Overall => throughflow_transition(fs)?.overall,
    };
    Ok(reciprocity_of(&x))
}

pub fn reciprocity_of(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut matched = 0.0;
    for i in 0..n {
        for j in 0..n {
            matched += x[(i, j)].min(x[(j, i)]);
        }
    }
    matched / total
}

/// Partial sums of `Σ C^q` until the increment drops below `tol` (max norm)
/// or `max_terms` is reached. Returns the sum and the number of terms used.
pub fn power_series_overall(c: &DMatrix<f64>, tol: f64, max_terms: usize) -> (DMatrix<f64>, usize) {
    let n = c.nrows();
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for q in 1..=max_terms {
        term = &term * c;
        sum += &term;
        if term.amax() < tol {
            return (sum, q);
        }
    }
    (sum, max_terms)
}
