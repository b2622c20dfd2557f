use nalgebra::DMatrix;

use crate::graph::{Digraph, Edge};
use crate::{Error, Result};

/// Undirected overlap graph with weights `(H Hᵀ)_ij` between rows i ≠ j.
/// Pairs with zero overlap get no edge; self-overlap is dropped.
pub fn overlap_network(h: &DMatrix<f64>) -> Result<Digraph> {
    let n = h.nrows();
    if h.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParams("overlap matrix must be nonnegative and finite".into()));
    }
    if let Some(i) = (0..n).find(|&i| h.row(i).iter().all(|&x| x == 0.0)) {
        return Err(Error::EmptyRow(i + 1));
    }
    let a = h * h.transpose();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] > 0.0 {
                edges.push(Edge::new(i, j, a[(i, j)]));
                edges.push(Edge::new(j, i, a[(i, j)]));
            }
        }
    }
    Digraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_overlap() {
        let g = overlap_network(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn identical_rows() {
        let h = DMatrix::from_row_slice(2, 3, &[0.2, 0.5, 0.3, 0.2, 0.5, 0.3]);
        let g = overlap_network(&h).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!((g.edge(0).weight - (0.04 + 0.25 + 0.09)).abs() < 1e-15);
        assert!(g.is_symmetric());
    }

    #[test]
    fn single_shared_column() {
        let h = DMatrix::from_row_slice(3, 3, &[0.7, 0.3, 0.0, 0.4, 0.0, 0.6, 0.0, 0.0, 1.0]);
        let g = overlap_network(&h).unwrap();
        let j = g.find_edge(0, 1).unwrap();
        assert_eq!(g.edge(j).weight, 0.7 * 0.4);
        assert!(g.find_edge(0, 2).is_none());
    }

    #[test]
    fn empty_row_is_reported() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(overlap_network(&h), Err(Error::EmptyRow(2))));
    }
}
