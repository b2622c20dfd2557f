use rayon::prelude::*;
use serde::Serialize;

use super::heat::{least_squares_slope, KirchhoffLaplacian};
use crate::graph::{Digraph, MetricGraph};
use crate::linalg::BandedSpd;
use crate::{Error, Result};

pub const QUAD_TOL: f64 = 1e-10;
const QUAD_DEPTH: u32 = 48;

// 5-point Gauss–Legendre on [0, 1]
const GAUSS_NODES: [f64; 5] = [
    0.046_910_077_030_668,
    0.230_765_344_947_158_5,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_5,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_4,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_5,
];

/// Equidistant grid on the unit square as a metric graph: grid points
/// without the four corners, edges of length `h = 1/N` along the positive
/// axes, each with at least one interior endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    pub n: usize,
    pub h: f64,
    /// Grid indices `(i, j)` of each vertex; the point is `(i h, j h)`.
    pub points: Vec<(usize, usize)>,
    pub exterior: Vec<bool>,
    digraph: Digraph,
}

impl GridGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParams(format!("grid needs N ≥ 3, got {n}")));
        }
        let corner = |i: usize, j: usize| (i == 0 || i == n) && (j == 0 || j == n);
        let mut points = Vec::with_capacity((n + 1) * (n + 1) - 4);
        for j in 0..=n {
            for i in 0..=n {
                if !corner(i, j) {
                    points.push((i, j));
                }
            }
        }
        let exterior: Vec<bool> = points.iter().map(|&(i, j)| i == 0 || j == 0 || i == n || j == n).collect();
        let mut pairs = Vec::new();
        for (v, &(i, j)) in points.iter().enumerate() {
            for (di, dj) in [(1, 0), (0, 1)] {
                if let Some(w) = grid_index(n, i + di, j + dj) {
                    if !(exterior[v] && exterior[w]) {
                        pairs.push((v, w));
                    }
                }
            }
        }
        let digraph = Digraph::from_pairs(points.len(), &pairs)?;
        Ok(Self { n, h: 1.0 / n as f64, points, exterior, digraph })
    }

    /// Vertex number of grid point `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        grid_index(self.n, i, j)
    }

    pub fn digraph(&self) -> &Digraph {
        &self.digraph
    }

    pub fn metric_graph(&self) -> MetricGraph {
        let m = self.digraph.edge_count();
        MetricGraph::new(self.digraph.clone(), vec![self.h; m]).expect("positive lengths")
    }

    pub fn laplacian(&self) -> KirchhoffLaplacian {
        let ext = (0..self.points.len()).filter(|&v| self.exterior[v]).collect();
        KirchhoffLaplacian::with_dirichlet(self.metric_graph(), ext).expect("valid exterior set")
    }

    pub fn point(&self, v: usize) -> (f64, f64) {
        let (i, j) = self.points[v];
        (i as f64 * self.h, j as f64 * self.h)
    }

    /// Unit direction of edge `e`, (1, 0) or (0, 1).
    pub fn direction(&self, e: usize) -> (f64, f64) {
        let ed = self.digraph.edge(e);
        if self.points[ed.head].0 > self.points[ed.tail].0 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    }

    fn interior_slot(&self, v: usize) -> Option<usize> {
        let (i, j) = self.points[v];
        (!self.exterior[v]).then(|| (j - 1) * (self.n - 1) + (i - 1))
    }
}

fn grid_index(n: usize, i: usize, j: usize) -> Option<usize> {
    if i > n || j > n || ((i == 0 || i == n) && (j == 0 || j == n)) {
        return None;
    }
    // rows 0 and n lack two corners each
    let before = if j == 0 { 0 } else { (n - 1) + (j - 1) * (n + 1) };
    let col = if j == 0 || j == n { i - 1 } else { i };
    Some(before + col)
}

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, QUAD_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { a, b });
    }
    Ok(simpson_step(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Solution of `−u″ = ½ f` on every grid edge with Kirchhoff conditions at
/// interior vertices and `u = 0` on the exterior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub n: usize,
    pub h: f64,
    /// Value at every vertex of the grid graph.
    pub vertex_values: Vec<f64>,
    #[serde(skip)]
    pub grid: GridGraph,
}

struct EdgeLoad<'a, F> {
    f: &'a F,
    x0: (f64, f64),
    dir: (f64, f64),
}

impl<F: Fn(f64, f64) -> f64> EdgeLoad<'_, F> {
    fn g(&self, s: f64) -> f64 {
        0.5 * (self.f)(self.x0.0 + s * self.dir.0, self.x0.1 + s * self.dir.1)
    }

    /// `(∫₀ˢ t g dt, ∫ₛʰ (h − t) g dt)`.
    fn moments(&self, s: f64, h: f64) -> Result<(f64, f64)> {
        let lo = if s > 0.0 { adaptive_simpson(&|t| t * self.g(t), 0.0, s, QUAD_TOL)? } else { 0.0 };
        let hi = if s < h { adaptive_simpson(&|t| (h - t) * self.g(t), s, h, QUAD_TOL)? } else { 0.0 };
        Ok((lo, hi))
    }
}

fn load<'a, F>(grid: &GridGraph, f: &'a F, e: usize) -> EdgeLoad<'a, F> {
    EdgeLoad { f, x0: grid.point(grid.digraph.edge(e).tail), dir: grid.direction(e) }
}

pub fn dirichlet_grid_solve<F: Fn(f64, f64) -> f64>(n: usize, f: &F) -> Result<GridSolution> {
    let grid = GridGraph::new(n)?;
    let h = grid.h;
    let size = (n - 1) * (n - 1);
    let mut k = BandedSpd::zeros(size, n - 1);
    let mut rhs = vec![0.0; size];
    for (e, ed) in grid.digraph.edges().iter().enumerate() {
        let ld = load(&grid, f, e);
        let (_, full_hi) = ld.moments(0.0, h)?;
        let (full_lo, _) = ld.moments(h, h)?;
        // particular solution with zero end values: w′(0), w′(h)
        let (a, b) = (full_hi / h, -full_lo / h);
        let (st, sh) = (grid.interior_slot(ed.tail), grid.interior_slot(ed.head));
        if let Some(p) = st {
            k.add(p, p, 1.0 / h);
            rhs[p] += a;
        }
        if let Some(q) = sh {
            k.add(q, q, 1.0 / h);
            rhs[q] -= b;
        }
        if let (Some(p), Some(q)) = (st, sh) {
            k.add(p, q, -1.0 / h);
        }
    }
    k.factor()?;
    let u = k.solve(&rhs);
    let vertex_values = (0..grid.points.len()).map(|v| grid.interior_slot(v).map_or(0.0, |p| u[p])).collect();
    Ok(GridSolution { n, h, vertex_values, grid })
}

impl GridSolution {
    /// `(u, du/ds)` at arc length `s ∈ [0, h]` along edge `e`.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: &F, e: usize, s: f64) -> Result<(f64, f64)> {
        let h = self.h;
        let ed = self.grid.digraph.edge(e);
        let (u0, u1) = (self.vertex_values[ed.tail], self.vertex_values[ed.head]);
        let (lo, hi) = load(&self.grid, f, e).moments(s, h)?;
        let w = ((h - s) * lo + s * hi) / h;
        let dw = (hi - lo) / h;
        Ok((u0 + (u1 - u0) * s / h + w, (u1 - u0) / h + dw))
    }

    /// Largest Kirchhoff sum over interior vertices.
    pub fn kirchhoff_residual<F: Fn(f64, f64) -> f64>(&self, f: &F) -> Result<f64> {
        let mut flux = vec![0.0; self.vertex_values.len()];
        for (e, ed) in self.grid.digraph.edges().iter().enumerate() {
            flux[ed.head] += self.sample(f, e, self.h)?.1;
            flux[ed.tail] -= self.sample(f, e, 0.0)?.1;
        }
        Ok((0..flux.len()).filter(|&v| !self.grid.exterior[v]).fold(0.0, |a, v| a.max(flux[v].abs())))
    }

    /// `(h¹_h error, ℓ∞_h error)` against `u` with gradient `grad`.
    pub fn errors<F, U, G>(&self, f: &F, u: &U, grad: &G) -> Result<(f64, f64)>
    where
        F: Fn(f64, f64) -> f64,
        U: Fn(f64, f64) -> f64,
        G: Fn(f64, f64) -> (f64, f64),
    {
        let h = self.h;
        let (mut h1, mut sup) = (0.0f64, 0.0f64);
        for e in 0..self.grid.digraph.edge_count() {
            let (x0, y0) = self.grid.point(self.grid.digraph.edge(e).tail);
            let (dx, dy) = self.grid.direction(e);
            let mut check = |s: f64| -> Result<(f64, f64)> {
                let (uh, duh) = self.sample(f, e, s)?;
                let (x, y) = (x0 + s * dx, y0 + s * dy);
                let (gx, gy) = grad(x, y);
                let (eu, ed) = (uh - u(x, y), duh - (gx * dx + gy * dy));
                sup = sup.max(eu.abs());
                Ok((eu, ed))
            };
            check(0.0)?;
            check(h)?;
            for (t, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                let (eu, ed) = check(t * h)?;
                h1 += w * h * (eu * eu + ed * ed);
            }
        }
        Ok((h1.sqrt(), sup))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub h1_error: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln h`.
    pub h1_slope: f64,
    pub sup_slope: f64,
}

impl ConvergenceTable {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].h1_error < w[0].h1_error && w[1].sup_error < w[0].sup_error)
    }
}

/// Grid solutions for every `N` in `ns`, solved in parallel, compared with
/// the exact solution `u`.
pub fn dirichlet_convergence<F, U, G>(f: &F, u: &U, grad: &G, ns: &[usize]) -> Result<ConvergenceTable>
where
    F: Fn(f64, f64) -> f64 + Sync,
    U: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let mut rows = ns
        .par_iter()
        .map(|&n| {
            let sol = dirichlet_grid_solve(n, f)?;
            let (h1_error, sup_error) = sol.errors(f, u, grad)?;
            Ok(ConvergenceRow { n, h: sol.h, h1_error, sup_error })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    let slope = |pick: fn(&ConvergenceRow) -> f64| {
        if rows.len() < 2 {
            return f64::NAN;
        }
        let x: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| pick(r).ln()).collect();
        least_squares_slope(&x, &y)
    };
    let h1_slope = slope(|r| r.h1_error);
    let sup_slope = slope(|r| r.sup_error);
    Ok(ConvergenceTable { rows, h1_slope, sup_slope })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn manufactured(x: f64, y: f64) -> f64 {
        2.0 * PI * PI * (PI * x).sin() * (PI * y).sin()
    }

    #[test]
    fn grid_structure() {
        for n in [3, 4, 7] {
            let g = GridGraph::new(n).unwrap();
            assert_eq!(g.points.len(), (n + 1) * (n + 1) - 4);
            assert_eq!(g.digraph().edge_count(), 2 * n * (n - 1));
            for e in g.digraph().edges() {
                assert!(!(g.exterior[e.tail] && g.exterior[e.head]));
                let (a, b) = (g.points[e.tail], g.points[e.head]);
                assert!((b.0 == a.0 + 1 && b.1 == a.1) || (b.1 == a.1 + 1 && b.0 == a.0));
            }
            for (v, &(i, j)) in g.points.iter().enumerate() {
                assert_eq!(g.index(i, j), Some(v));
            }
            assert_eq!(g.index(0, 0), None);
            assert_eq!(g.index(n, n), None);
            let interior = g.exterior.iter().filter(|&&e| !e).count();
            assert_eq!(interior, (n - 1) * (n - 1));
            assert_eq!(g.laplacian().dirichlet().len(), g.points.len() - interior);
        }
    }

    #[test]
    fn corner_adjacent_edges_keep_an_interior_end() {
        let g = GridGraph::new(3).unwrap();
        let a = g.index(1, 0).unwrap();
        let b = g.index(0, 1).unwrap();
        // (1,0) only reaches (1,1) upward; the boundary edge to (2,0) is absent
        assert_eq!(g.digraph().out_edges(a).len(), 1);
        assert_eq!(g.digraph().out_edges(b).len(), 1);
    }

    #[test]
    fn simpson_is_accurate() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!(matches!(adaptive_simpson(&|_| f64::NAN, 0.0, 1.0, 1e-10), Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn zero_load_gives_zero() {
        let s = dirichlet_grid_solve(5, &|_, _| 0.0).unwrap();
        assert!(s.vertex_values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn manufactured_solution_on_coarse_grid() {
        let s = dirichlet_grid_solve(4, &manufactured).unwrap();
        for (v, &u) in s.vertex_values.iter().enumerate() {
            let (x, y) = s.grid.point(v);
            assert!((u - (PI * x).sin() * (PI * y).sin()).abs() < 1e-6, "vertex {v}");
        }
        assert!(s.kirchhoff_residual(&manufactured).unwrap() < 1e-8);
    }

    #[test]
    fn exterior_values_are_exact_zeros() {
        let s = dirichlet_grid_solve(6, &|x, y| 1.0 + x * y).unwrap();
        for v in 0..s.vertex_values.len() {
            if s.grid.exterior[v] {
                assert_eq!(s.vertex_values[v], 0.0);
            }
        }
        assert!(s.kirchhoff_residual(&|x, y| 1.0 + x * y).unwrap() < 1e-8);
    }

    #[test]
    fn edge_profile_solves_the_ode() {
        let f = |x: f64, y: f64| x * x + 3.0 * y;
        let s = dirichlet_grid_solve(5, &f).unwrap();
        let d = 1e-4 * s.h;
        for e in [0, 7, 20] {
            let (x0, y0) = s.grid.point(s.grid.digraph().edge(e).tail);
            let (dx, dy) = s.grid.direction(e);
            for t in [0.3, 0.6] {
                let sp = t * s.h;
                let (_, up) = s.sample(&f, e, sp + d).unwrap();
                let (_, um) = s.sample(&f, e, sp - d).unwrap();
                let second = (up - um) / (2.0 * d);
                let target = 0.5 * f(x0 + sp * dx, y0 + sp * dy);
                assert!((second + target).abs() < 1e-4, "edge {e}: {second} vs {target}");
            }
        }
    }

    #[test]
    fn symmetric_load_gives_symmetric_solution() {
        let f = |x: f64, y: f64| x * y * (1.0 - x) + x * y * (1.0 - y);
        let s = dirichlet_grid_solve(7, &f).unwrap();
        for (v, &(i, j)) in s.grid.points.iter().enumerate() {
            let w = s.grid.index(j, i).unwrap();
            assert!((s.vertex_values[v] - s.vertex_values[w]).abs() < 1e-12);
        }
    }

    #[test]
    fn non_separable_mode_converges() {
        let f = |x: f64, y: f64| 5.0 * PI * PI * (PI * x).sin() * (2.0 * PI * y).sin();
        let u = |x: f64, y: f64| (PI * x).sin() * (2.0 * PI * y).sin();
        let grad = |x: f64, y: f64| {
            (PI * (PI * x).cos() * (2.0 * PI * y).sin(), 2.0 * PI * (PI * x).sin() * (2.0 * PI * y).cos())
        };
        let t = dirichlet_convergence(&f, &u, &grad, &[8, 16, 32]).unwrap();
        assert!(t.monotone(), "{t:?}");
        assert!(t.sup_slope >= 0.4 && t.h1_slope >= 0.4, "{t:?}");
    }
}
