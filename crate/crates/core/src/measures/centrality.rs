use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::Digraph;

/// Whether shortest paths follow edge directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathView {
    #[default]
    Directed,
    /// Every edge is traversable both ways.
    Undirected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centralities {
    /// Harmonic closeness `Σ_j 1/d(v_i, v_j)`; unreachable vertices add 0.
    pub closeness: Vec<f64>,
    /// Betweenness over ordered source/target pairs.
    pub betweenness: Vec<f64>,
    /// Directed view: diagonal of D = D⁺ + D⁻. Undirected view: number of
    /// distinct neighbours.
    pub degree: Vec<f64>,
}

/// Relative tolerance for treating two path lengths as equal.
const TIE_TOL: f64 = 1e-12;

/// Shortest-path centralities with edge weights as lengths.
pub fn centralities(g: &Digraph, view: PathView) -> Centralities {
    let n = g.vertex_count();
    let adj = neighbour_lists(g, view);
    let mut closeness = vec![0.0; n];
    let mut betweenness = vec![0.0; n];
    for s in 0..n {
        let sp = single_source(&adj, s);
        closeness[s] = sp.dist.iter().enumerate()
            .filter(|&(t, d)| t != s && d.is_finite())
            .map(|(_, d)| 1.0 / d)
            .sum();
        let mut delta = vec![0.0; n];
        for &w in sp.order.iter().rev() {
            for &v in &sp.pred[w] {
                delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                betweenness[w] += delta[w];
            }
        }
    }
    let degree = match view {
        PathView::Directed => {
            let mut d = vec![0.0; n];
            for e in g.edges() {
                d[e.tail] += 1.0;
                d[e.head] += 1.0;
            }
            d
        }
        PathView::Undirected => g.simple_neighbours().iter().map(|nb| nb.len() as f64).collect(),
    };
    Centralities { closeness, betweenness, degree }
}

/// Per-vertex `(neighbour, length)` lists; the minimum length is kept when
/// both directions of a pair exist in the undirected view.
fn neighbour_lists(g: &Digraph, view: PathView) -> Vec<Vec<(usize, f64)>> {
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut push = |a: usize, b: usize, w: f64| {
        if a == b {
            return;
        }
        match adj[a].iter_mut().find(|(x, _)| *x == b) {
            Some(entry) => entry.1 = entry.1.min(w),
            None => adj[a].push((b, w)),
        }
    };
    for e in g.edges() {
        push(e.tail, e.head, e.weight);
        if view == PathView::Undirected {
            push(e.head, e.tail, e.weight);
        }
    }
    for list in &mut adj {
        list.sort_by_key(|&(v, _)| v);
    }
    adj
}

struct ShortestPaths {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    pred: Vec<Vec<usize>>,
    /// Vertices in order of non-decreasing distance.
    order: Vec<usize>,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn single_source(adj: &[Vec<(usize, f64)>], s: usize) -> ShortestPaths {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0; n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    dist[s] = 0.0;
    sigma[s] = 1.0;
    let mut heap = BinaryHeap::from([Item(0.0, s)]);
    while let Some(Item(d, v)) = heap.pop() {
        if done[v] || d > dist[v] {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &(w, len) in &adj[v] {
            let nd = d + len;
            let tol = TIE_TOL * nd.max(1.0);
            if nd < dist[w] - tol {
                dist[w] = nd;
                sigma[w] = sigma[v];
                pred[w].clear();
                pred[w].push(v);
                heap.push(Item(nd, w));
            } else if (nd - dist[w]).abs() <= tol && !done[w] {
                sigma[w] += sigma[v];
                pred[w].push(v);
            }
        }
    }
    ShortestPaths { dist, sigma, pred, order }
}
