//! Inputs shared by the kernel benchmarks in `benches/`.

use netdyn_core::diffusion::KirchhoffLaplacian;
use netdyn_core::measures::{generate, RandomGraph};
use netdyn_core::traffic::{AngleConvention, GlobalParams, RoadNetwork, RoadParams, TrafficState};
use netdyn_core::transport::{EdgeField, Speed, TransportSystem};
use netdyn_core::{Digraph, MetricGraph, PlanarEmbedding};

/// Erdős–Rényi digraph with mean out-degree about 4.
pub fn random_digraph(n: usize, seed: u64) -> Digraph {
    generate(RandomGraph::ErdosRenyi { n, p: 4.0 / n as f64 }, seed).expect("valid ER parameters")
}

/// Directed cycle on `n` vertices with unit speeds and weights.
pub fn cycle_transport(n: usize) -> TransportSystem {
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let g = MetricGraph::equilateral(Digraph::from_pairs(n, &pairs).expect("cycle"));
    TransportSystem::on_graph(&g, &vec![Speed::parse("1").expect("speed"); n], &vec![1.0; n]).expect("cycle system")
}

/// Smooth positive field with `cells` cells on each of `edges` edges.
pub fn smooth_field(edges: usize, cells: usize) -> EdgeField {
    let values = (0..edges)
        .map(|j| (0..cells).map(|c| 1.0 + 0.5 * ((c + 7 * j) as f64 * 0.3).sin()).collect())
        .collect();
    EdgeField::new(values).expect("rectangular field")
}

/// Kirchhoff Laplacian of the undirected path on `n` vertices.
pub fn path_laplacian(n: usize) -> KirchhoffLaplacian {
    let pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    KirchhoffLaplacian::new(MetricGraph::equilateral(Digraph::from_pairs(n, &pairs).expect("path")))
}

/// Ring road of `k` unit segments around a regular polygon, `cells` cells per edge.
pub fn ring_road(k: usize, cells: usize) -> (RoadNetwork, TrafficState) {
    let pairs: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    let g = MetricGraph::equilateral(Digraph::from_pairs(k, &pairs).expect("ring"));
    let r = 0.5 / (std::f64::consts::PI / k as f64).sin();
    let points = (0..k)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let emb = PlanarEmbedding::new(&g, points).expect("regular polygon");
    let ds = 1.0 / cells as f64;
    let global = GlobalParams { nu: 0.5, c: 0.05, chi: 1e-3, dt: 0.5 * ds, ds };
    let road = RoadParams { lanes: 1, cells, v_max: 1.0, rho_cr: 0.5, a: 2.0 };
    let net = RoadNetwork::new(g, emb, vec![road; k], global, &[], &[], AngleConvention::Heading).expect("ring road");
    let rho = (0..k).map(|j| (0..cells).map(|c| 0.3 + 0.2 * ((c + 3 * j) as f64 * 0.7).sin()).collect()).collect();
    let state = TrafficState::equilibrium(&net, rho).expect("densities in range");
    (net, state)
}
