use nalgebra::DMatrix;

use super::Digraph;

/// Every vertex- and edge-level matrix associated with a digraph.
///
/// Naming follows the in/out convention: `in` operators collect what arrives
/// at a vertex, `out` operators what leaves it. Unweighted variants replace
/// every edge weight by 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSuite {
    /// Φ⁺, n×m: `phi_in[(i, j)] = 1` iff edge j ends at vertex i.
    pub phi_in: DMatrix<f64>,
    /// Φ⁻, n×m: `phi_out[(i, j)] = 1` iff edge j starts at vertex i.
    pub phi_out: DMatrix<f64>,
    pub weights: Vec<f64>,
    /// A⁺_w: `(i, j) = w_k` for an edge `j -> i`.
    pub adj_in: DMatrix<f64>,
    /// A⁻_w = (A⁺_w)ᵀ.
    pub adj_out: DMatrix<f64>,
    pub adj_in_unweighted: DMatrix<f64>,
    pub adj_out_unweighted: DMatrix<f64>,
    /// A_w = A⁺_w + A⁻_w.
    pub adj: DMatrix<f64>,
    pub adj_unweighted: DMatrix<f64>,
    /// D⁺_w, diagonal of weighted in-degrees.
    pub deg_in: DMatrix<f64>,
    /// D⁻_w, diagonal of weighted out-degrees.
    pub deg_out: DMatrix<f64>,
    pub deg_in_unweighted: DMatrix<f64>,
    pub deg_out_unweighted: DMatrix<f64>,
    /// D_w = D⁺_w + D⁻_w.
    pub deg: DMatrix<f64>,
    pub deg_unweighted: DMatrix<f64>,
    /// N⁺_w = D⁻_w − A⁺_w.
    pub advection_in: DMatrix<f64>,
    /// N⁻_w = D⁺_w − A⁻_w.
    pub advection_out: DMatrix<f64>,
    pub advection_in_unweighted: DMatrix<f64>,
    pub advection_out_unweighted: DMatrix<f64>,
    /// L⁺_w = D⁺_w − A⁺_w (in-degree Kirchhoff matrix).
    pub kirchhoff_in: DMatrix<f64>,
    /// L⁻_w = D⁻_w − A⁻_w.
    pub kirchhoff_out: DMatrix<f64>,
    pub kirchhoff_in_unweighted: DMatrix<f64>,
    pub kirchhoff_out_unweighted: DMatrix<f64>,
    /// L^B_w = L⁺_w + L⁻_w.
    pub laplace_beltrami: DMatrix<f64>,
    pub laplace_beltrami_unweighted: DMatrix<f64>,
    /// B⁺_w, m×m: `(i, j) = w_j` when edge j feeds into edge i.
    pub line_in: DMatrix<f64>,
    /// B⁻_w, m×m: `(i, j) = w_i` when edge j feeds into edge i.
    pub line_out: DMatrix<f64>,
    /// B, the 0/1 line-graph adjacency.
    pub line: DMatrix<f64>,
}

pub fn operator_suite(g: &Digraph) -> OperatorSuite {
    let n = g.vertex_count();
    let m = g.edge_count();
    let weights = g.weights();

    let mut phi_in = DMatrix::zeros(n, m);
    let mut phi_out = DMatrix::zeros(n, m);
    let mut adj_in = DMatrix::zeros(n, n);
    let mut adj_in_unweighted = DMatrix::zeros(n, n);
    let mut din = vec![0.0; n];
    let mut dout = vec![0.0; n];
    let mut din_u = vec![0.0; n];
    let mut dout_u = vec![0.0; n];
    for (j, e) in g.edges().iter().enumerate() {
        phi_in[(e.head, j)] = 1.0;
        phi_out[(e.tail, j)] = 1.0;
        adj_in[(e.head, e.tail)] += e.weight;
        adj_in_unweighted[(e.head, e.tail)] = 1.0;
        din[e.head] += e.weight;
        dout[e.tail] += e.weight;
        din_u[e.head] += 1.0;
        dout_u[e.tail] += 1.0;
    }
    let adj_out = adj_in.transpose();
    let adj_out_unweighted = adj_in_unweighted.transpose();
    let diag = |d: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d));
    let deg_in = diag(&din);
    let deg_out = diag(&dout);
    let deg_in_unweighted = diag(&din_u);
    let deg_out_unweighted = diag(&dout_u);

    let kirchhoff_in = &deg_in - &adj_in;
    let kirchhoff_out = &deg_out - &adj_out;
    let kirchhoff_in_unweighted = &deg_in_unweighted - &adj_in_unweighted;
    let kirchhoff_out_unweighted = &deg_out_unweighted - &adj_out_unweighted;

    OperatorSuite {
        adj: &adj_in + &adj_out,
        adj_unweighted: &adj_in_unweighted + &adj_out_unweighted,
        deg: &deg_in + &deg_out,
        deg_unweighted: &deg_in_unweighted + &deg_out_unweighted,
        advection_in: &deg_out - &adj_in,
        advection_out: &deg_in - &adj_out,
        advection_in_unweighted: &deg_out_unweighted - &adj_in_unweighted,
        advection_out_unweighted: &deg_in_unweighted - &adj_out_unweighted,
        laplace_beltrami: &kirchhoff_in + &kirchhoff_out,
        laplace_beltrami_unweighted: &kirchhoff_in_unweighted + &kirchhoff_out_unweighted,
        line_in: line_graph_adjacency(g, LineWeighting::In),
        line_out: line_graph_adjacency(g, LineWeighting::Out),
        line: line_graph_adjacency(g, LineWeighting::Unweighted),
        phi_in,
        phi_out,
        weights,
        adj_in,
        adj_out,
        adj_in_unweighted,
        adj_out_unweighted,
        deg_in,
        deg_out,
        deg_in_unweighted,
        deg_out_unweighted,
        kirchhoff_in,
        kirchhoff_out,
        kirchhoff_in_unweighted,
        kirchhoff_out_unweighted,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineWeighting {
    /// Entry `w_j` (weight of the feeding edge).
    In,
    /// Entry `w_i` (weight of the fed edge).
    Out,
    Unweighted,
}

/// m×m line-graph adjacency: entry (i, j) is nonzero exactly when the head of
/// edge j is the tail of edge i. A loop follows itself.
pub fn line_graph_adjacency(g: &Digraph, weighting: LineWeighting) -> DMatrix<f64> {
    let m = g.edge_count();
    let mut b = DMatrix::zeros(m, m);
    for (j, ej) in g.edges().iter().enumerate() {
        for &i in g.out_edges(ej.head) {
            b[(i, j)] = match weighting {
                LineWeighting::In => ej.weight,
                LineWeighting::Out => g.edge(i).weight,
                LineWeighting::Unweighted => 1.0,
            };
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::*;

    fn naive(g: &Digraph) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = g.vertex_count();
        let m = g.edge_count();
        let phi_in = DMatrix::from_fn(n, m, |i, j| if g.edge(j).head == i { 1.0 } else { 0.0 });
        let phi_out = DMatrix::from_fn(n, m, |i, j| if g.edge(j).tail == i { 1.0 } else { 0.0 });
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(g.weights()));
        let a_in = &phi_in * &w * phi_out.transpose();
        let b_in = phi_out.transpose() * &phi_in * &w;
        let b_out = &w * phi_out.transpose() * &phi_in;
        let d_in = DMatrix::from_diagonal(&(&phi_in * nalgebra::DVector::from_vec(g.weights())));
        (a_in, b_in, b_out, d_in)
    }

    fn arb_digraph() -> impl Strategy<Value = Digraph> {
        (1usize..=8).prop_flat_map(|n| {
            proptest::collection::btree_map((0..n, 0..n), 0.1f64..5.0, 0..=(n * n).min(20))
                .prop_map(move |map| {
                    let edges = map.into_iter().map(|((t, h), w)| Edge::new(t, h, w)).collect();
                    Digraph::new(n, edges).unwrap()
                })
        })
    }

    #[test]
    fn two_cycle_matrices() {
        let g = Digraph::from_pairs(2, &[(0, 1), (1, 0)]).unwrap();
        let ops = operator_suite(&g);
        assert_eq!(ops.kirchhoff_in, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert_eq!(ops.line_in, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn weighted_loop() {
        let g = Digraph::new(1, vec![Edge::new(0, 0, 0.7)]).unwrap();
        let ops = operator_suite(&g);
        assert_eq!(ops.adj_in[(0, 0)], 0.7);
        assert_eq!(ops.deg_in[(0, 0)], 0.7);
        assert_eq!(ops.kirchhoff_in[(0, 0)], 0.0);
        assert_eq!(ops.line_in[(0, 0)], 0.7);
    }

    #[test]
    fn path_line_graph() {
        let g = Digraph::new(3, vec![Edge::new(0, 1, 2.0), Edge::new(1, 2, 3.0)]).unwrap();
        let b = line_graph_adjacency(&g, LineWeighting::In);
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 2.0, 0.0]));
        let lone = Digraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(line_graph_adjacency(&lone, LineWeighting::In), DMatrix::zeros(2, 2));
    }

    #[test]
    fn figure_eight_line_graph() {
        let g = Digraph::new(1, vec![Edge::new(0, 0, 0.5), Edge::new(0, 0, 0.5)]).unwrap();
        let b = line_graph_adjacency(&g, LineWeighting::In);
        assert_eq!(b, DMatrix::from_element(2, 2, 0.5));
        assert_eq!(operator_suite(&g).adj_in[(0, 0)], 1.0);
    }

    #[test]
    fn line_weightings_differ_by_side() {
        let g = Digraph::new(
            2,
            vec![Edge::new(0, 0, 0.25), Edge::new(0, 1, 0.75), Edge::new(1, 0, 1.0)],
        )
        .unwrap();
        let b_out = line_graph_adjacency(&g, LineWeighting::Out);
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.25, 0.0, 0.25, 0.75, 0.0, 0.75, 0.0, 1.0, 0.0]);
        assert_eq!(b_out, expected);
        for j in 0..3 {
            assert_eq!(b_out.column(j).sum(), 1.0);
        }
    }

    proptest! {
        #[test]
        fn suite_matches_naive_products(g in arb_digraph()) {
            let ops = operator_suite(&g);
            let (a_in, b_in, b_out, d_in) = naive(&g);
            prop_assert_eq!(&ops.adj_in, &a_in);
            prop_assert_eq!(&ops.line_in, &b_in);
            prop_assert_eq!(&ops.line_out, &b_out);
            prop_assert_eq!(&ops.deg_in, &d_in);
        }

        #[test]
        fn structural_invariants(g in arb_digraph()) {
            let ops = operator_suite(&g);
            for j in 0..g.edge_count() {
                prop_assert_eq!(ops.phi_in.column(j).sum(), 1.0);
                prop_assert_eq!(ops.phi_out.column(j).sum(), 1.0);
                let diff = ops.phi_in.column(j) - ops.phi_out.column(j);
                prop_assert_eq!(diff.sum(), 0.0);
            }
            prop_assert_eq!(&ops.laplace_beltrami, &(&ops.kirchhoff_in + &ops.kirchhoff_out));
            for i in 0..g.vertex_count() {
                prop_assert!(ops.kirchhoff_in.row(i).sum().abs() < 1e-12);
                prop_assert!(ops.kirchhoff_out.row(i).sum().abs() < 1e-12);
            }
            prop_assert_eq!(&ops.adj_out, &ops.adj_in.transpose());
        }

        #[test]
        fn undirected_adjacency_is_symmetric(
            links in proptest::collection::btree_map((0usize..6, 0usize..6), 0.1f64..3.0, 0..10)
        ) {
            let links: Vec<_> = links.into_iter().filter(|((u, v), _)| u < v)
                .map(|((u, v), w)| (u, v, w)).collect();
            let g = Digraph::undirected(6, &links).unwrap();
            let ops = operator_suite(&g);
            prop_assert_eq!(&ops.adj, &ops.adj.transpose());
        }
    }
}
