use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Digraph;
use crate::{Error, Result};

/// Random undirected graph models. Outputs store each link as two arcs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RandomGraph {
    ErdosRenyi { n: usize, p: f64 },
    /// Ring lattice with `k` (even) nearest neighbours, rewired with probability `beta`.
    WattsStrogatz { n: usize, k: usize, beta: f64 },
    /// Growth from an `m0`-clique, each new vertex attaching `m` links.
    BarabasiAlbert { n: usize, m0: usize, m: usize },
}

pub fn generate(model: RandomGraph, seed: u64) -> Result<Digraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, links) = match model {
        RandomGraph::ErdosRenyi { n, p } => {
            if n == 0 || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("ER(n = {n}, p = {p})")));
            }
            let mut links = BTreeSet::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < p {
                        links.insert((i, j));
                    }
                }
            }
            (n, links)
        }
        RandomGraph::WattsStrogatz { n, k, beta } => {
            if n == 0 || k % 2 == 1 || k >= n || !(0.0..=1.0).contains(&beta) {
                return Err(Error::InvalidParams(format!("WS(n = {n}, k = {k}, beta = {beta})")));
            }
            (n, watts_strogatz(n, k, beta, &mut rng))
        }
        RandomGraph::BarabasiAlbert { n, m0, m } => {
            if m == 0 || m0 < m || n < m0 || m0 == 0 {
                return Err(Error::InvalidParams(format!("BA(n = {n}, m0 = {m0}, m = {m})")));
            }
            (n, barabasi_albert(n, m0, m, &mut rng))
        }
    };
    let links: Vec<(usize, usize, f64)> = links.into_iter().map(|(a, b)| (a, b, 1.0)).collect();
    Digraph::undirected(n, &links)
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn watts_strogatz(n: usize, k: usize, beta: f64, rng: &mut ChaCha8Rng) -> BTreeSet<(usize, usize)> {
    let mut links = BTreeSet::new();
    for i in 0..n {
        for s in 1..=k / 2 {
            links.insert(key(i, (i + s) % n));
        }
    }
    for s in 1..=k / 2 {
        for i in 0..n {
            let old = key(i, (i + s) % n);
            if rng.random::<f64>() >= beta || !links.contains(&old) {
                continue;
            }
            let degree_i = links.iter().filter(|&&(a, b)| a == i || b == i).count();
            if degree_i >= n - 1 {
                continue;
            }
            let target = loop {
                let t = rng.random_range(0..n);
                if t != i && !links.contains(&key(i, t)) {
                    break t;
                }
            };
            links.remove(&old);
            links.insert(key(i, target));
        }
    }
    links
}

fn barabasi_albert(n: usize, m0: usize, m: usize, rng: &mut ChaCha8Rng) -> BTreeSet<(usize, usize)> {
    let mut links = BTreeSet::new();
    // every vertex appears once per incident link
    let mut repeated = Vec::new();
    for i in 0..m0 {
        for j in (i + 1)..m0 {
            links.insert((i, j));
            repeated.push(i);
            repeated.push(j);
        }
    }
    for v in m0..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = if repeated.is_empty() {
                rng.random_range(0..v)
            } else {
                repeated[rng.random_range(0..repeated.len())]
            };
            targets.insert(t);
        }
        for t in targets {
            links.insert(key(t, v));
            repeated.push(t);
            repeated.push(v);
        }
    }
    links
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_degree(g: &Digraph) -> f64 {
        g.edge_count() as f64 / g.vertex_count() as f64
    }

    #[test]
    fn empty_er() {
        let g = generate(RandomGraph::ErdosRenyi { n: 100, p: 0.0 }, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn er_mean_degree_is_binomial() {
        let (n, p) = (200usize, 0.1);
        let trials = 50;
        let mean: f64 = (0..trials)
            .map(|s| mean_degree(&generate(RandomGraph::ErdosRenyi { n, p }, s).unwrap()))
            .sum::<f64>()
            / trials as f64;
        // mean degree is 2L/n with L ~ Binomial(n(n-1)/2, p)
        let pairs = (n * (n - 1) / 2) as f64;
        let se = 2.0 * (pairs * p * (1.0 - p)).sqrt() / n as f64 / (trials as f64).sqrt();
        let expected = (n - 1) as f64 * p;
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean}, expected {expected} ± {se}");
    }

    #[test]
    fn seeds_reproduce() {
        let m = RandomGraph::WattsStrogatz { n: 30, k: 4, beta: 0.3 };
        assert_eq!(generate(m, 7).unwrap(), generate(m, 7).unwrap());
        assert_ne!(generate(m, 7).unwrap(), generate(m, 8).unwrap());
    }

    #[test]
    fn ws_keeps_link_count() {
        let g = generate(RandomGraph::WattsStrogatz { n: 40, k: 6, beta: 0.5 }, 3).unwrap();
        assert_eq!(g.edge_count(), 2 * 40 * 3);
        let lattice = generate(RandomGraph::WattsStrogatz { n: 10, k: 2, beta: 0.0 }, 3).unwrap();
        assert!(lattice.simple_neighbours().iter().all(|nb| nb.len() == 2));
    }

    #[test]
    fn ba_link_count_and_heavy_tail() {
        let (n, m0, m) = (500, 3, 2);
        let g = generate(RandomGraph::BarabasiAlbert { n, m0, m }, 11).unwrap();
        assert_eq!(g.edge_count() / 2, 3 + (n - m0) * m);
        let nb = g.simple_neighbours();
        // density of the degree distribution over logarithmic bins [2^b, 2^(b+1))
        let max_deg = nb.iter().map(|l| l.len()).max().unwrap();
        let bins = (usize::BITS - max_deg.leading_zeros()) as usize;
        let mut density = vec![0.0; bins];
        for l in &nb {
            let b = (usize::BITS - l.len().leading_zeros() - 1) as usize;
            density[b] += 1.0 / (1u64 << b) as f64;
        }
        let tail = &density[1..];
        for w in tail.windows(2) {
            assert!(w[1] <= w[0], "log-binned density not decreasing: {density:?}");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate(RandomGraph::ErdosRenyi { n: 5, p: 1.5 }, 0).is_err());
        assert!(generate(RandomGraph::WattsStrogatz { n: 10, k: 3, beta: 0.1 }, 0).is_err());
        assert!(generate(RandomGraph::BarabasiAlbert { n: 10, m0: 2, m: 3 }, 0).is_err());
    }
}
