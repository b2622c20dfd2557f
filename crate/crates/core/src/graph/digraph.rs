use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A directed, weighted edge `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(tail: usize, head: usize, weight: f64) -> Self {
        Self { tail, head, weight }
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

/// Finite digraph with positive edge weights. Loops are allowed, parallel
/// edges between distinct vertices are not. Several loops may share a vertex
/// (the figure-eight); their weights add up in the vertex-level matrices.
/// Edge order is significant: it fixes the column order of the incidence
/// matrices and the index order of every edge-level operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("a digraph needs at least one vertex".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (j, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {} ({} -> {}) references a vertex outside 1..={n}",
                    j + 1,
                    e.tail + 1,
                    e.head + 1
                )));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {} has non-positive weight {}",
                    j + 1,
                    e.weight
                )));
            }
            if !e.is_loop() && !seen.insert((e.tail, e.head)) {
                return Err(Error::InvalidGraph(format!(
                    "multiple edge {} -> {}",
                    e.tail + 1,
                    e.head + 1
                )));
            }
            out_edges[e.tail].push(j);
            in_edges[e.head].push(j);
        }
        Ok(Self { n, edges, out_edges, in_edges })
    }

    /// Unit-weight digraph from `(tail, head)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(t, h)| Edge::new(t, h, 1.0)).collect())
    }

    /// Undirected graph: each `(u, v, w)` with `u != v` becomes the two arcs
    /// `u -> v` and `v -> u` of weight `w`; a loop is stored once.
    pub fn undirected(n: usize, links: &[(usize, usize, f64)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(2 * links.len());
        for &(u, v, w) in links {
            edges.push(Edge::new(u, v, w));
            if u != v {
                edges.push(Edge::new(v, u, w));
            }
        }
        Self::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> &Edge {
        &self.edges[j]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Indices of edges leaving `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    /// Indices of edges entering `v`.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn find_edge(&self, tail: usize, head: usize) -> Option<usize> {
        self.out_edges[tail].iter().copied().find(|&j| self.edges[j].head == head)
    }

    /// Same structure, new weights.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimMismatch(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| Edge::new(e.tail, e.head, w))
            .collect();
        Self::new(self.n, edges)
    }

    /// Every arc has a reverse arc of equal weight.
    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|e| {
            self.find_edge(e.head, e.tail)
                .is_some_and(|k| self.edges[k].weight == e.weight)
        })
    }

    pub fn is_strongly_connected(&self) -> bool {
        super::strong_components(self).len() == 1
    }

    /// Connected when edge directions are ignored.
    pub fn is_weakly_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let nbrs = self.out_edges[v]
                .iter()
                .map(|&j| self.edges[j].head)
                .chain(self.in_edges[v].iter().map(|&j| self.edges[j].tail));
            for u in nbrs {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Distinct neighbours of each vertex in the undirected simple view
    /// (directions dropped, loops ignored), sorted.
    pub fn simple_neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            if !e.is_loop() {
                nb[e.tail].push(e.head);
                nb[e.head].push(e.tail);
            }
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_parallel_edges_but_keeps_loops() {
        assert!(Digraph::from_pairs(2, &[(0, 1), (0, 1)]).is_err());
        assert!(Digraph::from_pairs(1, &[(0, 0), (0, 0)]).is_ok());
        let g = Digraph::from_pairs(1, &[(0, 0)]).unwrap();
        assert!(g.edge(0).is_loop());
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn rejects_bad_weights_and_vertices() {
        assert!(Digraph::new(2, vec![Edge::new(0, 1, 0.0)]).is_err());
        assert!(Digraph::new(2, vec![Edge::new(0, 1, f64::NAN)]).is_err());
        assert!(Digraph::new(2, vec![Edge::new(0, 2, 1.0)]).is_err());
        assert!(Digraph::new(0, vec![]).is_err());
    }

    #[test]
    fn undirected_builder_is_symmetric() {
        let g = Digraph::undirected(3, &[(0, 1, 2.0), (1, 2, 0.5), (2, 2, 1.0)]).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert!(g.is_symmetric());
        assert_eq!(g.simple_neighbours()[2], vec![1]);
    }

    #[test]
    fn connectivity_queries() {
        let chain = Digraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(chain.is_weakly_connected());
        assert!(!chain.is_strongly_connected());
        let split = Digraph::from_pairs(3, &[(0, 1)]).unwrap();
        assert!(!split.is_weakly_connected());
    }
}
