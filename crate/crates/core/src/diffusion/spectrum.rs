use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::graph::{operator_suite, MetricGraph};
use crate::linalg::symmetric_eigen_sorted;
use crate::{Error, Result};

/// Transition-matrix eigenvalues closer than this to ±1 are treated as ±1.
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// `π²k²`.
    S1,
    /// `cos√λ` is a transition-matrix eigenvalue inside (−1, 1).
    S2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEntry {
    pub lambda: f64,
    pub family: Family,
    /// `Some(1)` for λ = 0, `None` for the other S1 values, the transition
    /// eigenvalue multiplicity for S2.
    pub multiplicity: Option<usize>,
    /// Vertex values `X` of an eigenfunction (S2 only).
    #[serde(skip)]
    pub vertex_values: Option<DVector<f64>>,
}

/// Eigenvalues of the Kirchhoff Laplacian on an equilateral graph, up to
/// `π²·k_max²`, sorted ascending. Each S2 eigenspace of dimension > 1 is
/// listed once per basis vector.
pub fn equilateral_spectrum(g: &MetricGraph, k_max: usize) -> Result<Vec<SpectralEntry>> {
    if let Some(j) = g.first_non_unit() {
        return Err(Error::NotEquilateral(j + 1));
    }
    let d = g.digraph();
    if d.edge_count() == 0 || !d.is_weakly_connected() {
        return Err(Error::InvalidGraph("spectrum needs a connected graph with edges".into()));
    }
    let ops = operator_suite(d);
    let n = d.vertex_count();
    let deg: Vec<f64> = (0..n).map(|i| ops.deg_unweighted[(i, i)]).collect();
    // D^{-1/2} A D^{-1/2} is similar to D⁻¹A and symmetric
    let sym = DMatrix::from_fn(n, n, |i, k| ops.adj_unweighted[(i, k)] / (deg[i] * deg[k]).sqrt());
    let (mu, vecs) = symmetric_eigen_sorted(&sym);

    let cap = PI * PI * (k_max * k_max) as f64;
    let mut out: Vec<SpectralEntry> = (0..=k_max)
        .map(|k| SpectralEntry {
            lambda: PI * PI * (k * k) as f64,
            family: Family::S1,
            multiplicity: (k == 0).then_some(1),
            vertex_values: None,
        })
        .collect();
    for (idx, &m) in mu.iter().enumerate() {
        if m.abs() >= 1.0 - UNIT_TOL {
            continue;
        }
        let mult = mu.iter().filter(|&&o| (o - m).abs() < 1e-9).count();
        let x = DVector::from_fn(n, |i, _| vecs[(i, idx)] / deg[i].sqrt());
        let theta = m.acos();
        let mut branch = 0usize;
        loop {
            // all positive roots of cos r = m: θ + 2πb and 2π(b+1) − θ
            let roots = [theta + 2.0 * PI * branch as f64, 2.0 * PI * (branch + 1) as f64 - theta];
            if roots[0] * roots[0] > cap {
                break;
            }
            for r in roots {
                if r * r <= cap {
                    out.push(SpectralEntry {
                        lambda: r * r,
                        family: Family::S2,
                        multiplicity: Some(mult),
                        vertex_values: Some(x.clone()),
                    });
                }
            }
            branch += 1;
        }
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

/// Value and derivative at `s` of the eigenfunction on edge `j` with vertex
/// values `x`.
pub fn eigenfunction(g: &MetricGraph, lambda: f64, x: &DVector<f64>, j: usize, s: f64) -> (f64, f64) {
    let e = g.digraph().edge(j);
    let r = lambda.sqrt();
    let (u0, u1) = (x[e.tail], x[e.head]);
    let sr = r.sin();
    let u = (u0 * (r * (1.0 - s)).sin() + u1 * (r * s).sin()) / sr;
    let du = r * (-u0 * (r * (1.0 - s)).cos() + u1 * (r * s).cos()) / sr;
    (u, du)
}

/// Largest continuity mismatch and largest Kirchhoff sum over all vertices.
pub fn eigenfunction_residuals(g: &MetricGraph, lambda: f64, x: &DVector<f64>) -> (f64, f64) {
    let d = g.digraph();
    let mut continuity = 0.0f64;
    let mut flux = vec![0.0; d.vertex_count()];
    for (j, e) in d.edges().iter().enumerate() {
        let (u0, du0) = eigenfunction(g, lambda, x, j, 0.0);
        let (u1, du1) = eigenfunction(g, lambda, x, j, 1.0);
        continuity = continuity.max((u0 - x[e.tail]).abs()).max((u1 - x[e.head]).abs());
        flux[e.head] += du1;
        flux[e.tail] -= du0;
    }
    (continuity, flux.iter().fold(0.0, |a, f| a.max(f.abs())))
}
