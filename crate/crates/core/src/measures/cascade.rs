use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Digraph, Edge};
use crate::{Error, Result};

/// How missing links are added before the cascade runs. New links carry the
/// mean weight of the existing ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", content = "k", rename_all = "snake_case")]
pub enum LinkPolicy {
    #[default]
    None,
    /// `k` uniformly random absent arcs.
    Random(usize),
    /// The `k` absent arcs whose endpoints have the smallest degree sum.
    OrganizedPeriphery(usize),
}

/// Default failure threshold as a fraction of a vertex's total exposure.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Initially defaulting vertices.
    pub shocked: Vec<usize>,
    /// Share of each exposure written off when its counterparty defaults.
    pub loss_fraction: f64,
    /// Per-vertex thresholds; defaults to 10% of total exposure measured on
    /// the graph before any link is added.
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub policy: LinkPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    /// Vertices whose accumulated loss exceeded their threshold, sorted.
    pub failed: Vec<usize>,
    pub total_loss: f64,
    pub losses: Vec<f64>,
    pub added_links: Vec<(usize, usize)>,
}

/// Threshold contagion on an exposure network: an arc `u -> v` of weight `w`
/// means `u` holds a claim of size `w` on `v`. When `v` defaults (shocked or
/// failed), `u` loses `loss_fraction · w`; `u` fails once its total loss
/// strictly exceeds its threshold, and then defaults on its own creditors.
pub fn cascade(g: &Digraph, cfg: &CascadeConfig, seed: u64) -> Result<CascadeOutcome> {
    let n = g.vertex_count();
    if !(0.0..=1.0).contains(&cfg.loss_fraction) {
        return Err(Error::InvalidParams(format!("loss fraction {} outside [0, 1]", cfg.loss_fraction)));
    }
    if let Some(&v) = cfg.shocked.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidParams(format!("shocked vertex {} does not exist", v + 1)));
    }
    let thresholds = match &cfg.thresholds {
        Some(t) if t.len() != n => {
            return Err(Error::DimMismatch(format!("{} thresholds for {n} vertices", t.len())))
        }
        Some(t) if t.iter().any(|&x| !(x >= 0.0)) => {
            return Err(Error::InvalidParams("thresholds must be nonnegative".into()))
        }
        Some(t) => t.clone(),
        None => {
            let mut exposure = vec![0.0; n];
            for e in g.edges() {
                exposure[e.tail] += e.weight;
            }
            exposure.iter().map(|x| DEFAULT_THRESHOLD_FRACTION * x).collect()
        }
    };

    let (net, added_links) = augment(g, cfg.policy, seed)?;

    let mut losses = vec![0.0; n];
    let mut defaulted = vec![false; n];
    let mut failed = vec![false; n];
    let mut queue = VecDeque::new();
    for &v in &cfg.shocked {
        if !defaulted[v] {
            defaulted[v] = true;
            queue.push_back(v);
        }
    }
    if cfg.loss_fraction > 0.0 {
        while let Some(v) = queue.pop_front() {
            for &j in net.in_edges(v) {
                let e = net.edge(j);
                let u = e.tail;
                losses[u] += cfg.loss_fraction * e.weight;
                if !failed[u] && losses[u] > thresholds[u] {
                    failed[u] = true;
                    if !defaulted[u] {
                        defaulted[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    Ok(CascadeOutcome {
        failed: (0..n).filter(|&v| failed[v]).collect(),
        total_loss: losses.iter().sum(),
        losses,
        added_links,
    })
}

fn augment(g: &Digraph, policy: LinkPolicy, seed: u64) -> Result<(Digraph, Vec<(usize, usize)>)> {
    let n = g.vertex_count();
    let absent: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && g.find_edge(u, v).is_none())
        .collect();
    let chosen: Vec<(usize, usize)> = match policy {
        LinkPolicy::None => return Ok((g.clone(), Vec::new())),
        LinkPolicy::Random(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = absent;
            let k = k.min(pool.len());
            // partial Fisher-Yates
            for i in 0..k {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            pool.truncate(k);
            pool
        }
        LinkPolicy::OrganizedPeriphery(k) => {
            let mut deg = vec![0usize; n];
            for e in g.edges() {
                deg[e.tail] += 1;
                deg[e.head] += 1;
            }
            let mut pool = absent;
            pool.sort_by_key(|&(u, v)| (deg[u] + deg[v], u, v));
            pool.truncate(k);
            pool
        }
    };
    let mean = if g.edge_count() == 0 {
        1.0
    } else {
        g.weights().iter().sum::<f64>() / g.edge_count() as f64
    };
    let mut edges: Vec<Edge> = g.edges().to_vec();
    edges.extend(chosen.iter().map(|&(u, v)| Edge::new(u, v, mean)));
    Ok((Digraph::new(n, edges)?, chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{generate, RandomGraph};

    fn complete(n: usize) -> Digraph {
        let pairs: Vec<_> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
        Digraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn zero_shock_no_failures() {
        let g = complete(4);
        let cfg = CascadeConfig { shocked: vec![0], loss_fraction: 0.0, thresholds: None, policy: LinkPolicy::None };
        let out = cascade(&g, &cfg, 0).unwrap();
        assert!(out.failed.is_empty());
        assert_eq!(out.total_loss, 0.0);
        let cfg = CascadeConfig { shocked: vec![], loss_fraction: 1.0, ..cfg };
        assert!(cascade(&g, &cfg, 0).unwrap().failed.is_empty());
    }

    #[test]
    fn zero_thresholds_fail_everyone() {
        let g = complete(5);
        let cfg = CascadeConfig {
            shocked: vec![2],
            loss_fraction: 0.01,
            thresholds: Some(vec![0.0; 5]),
            policy: LinkPolicy::None,
        };
        assert_eq!(cascade(&g, &cfg, 0).unwrap().failed, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn chain_propagates_to_creditors_only() {
        // 0 lends to 1, 1 lends to 2; 2 defaults
        let g = Digraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = CascadeConfig { shocked: vec![2], loss_fraction: 1.0, thresholds: None, policy: LinkPolicy::None };
        let out = cascade(&g, &cfg, 0).unwrap();
        assert_eq!(out.failed, vec![0, 1]);
        assert_eq!(out.losses, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn periphery_links_do_not_shrink_the_cascade() {
        let g = generate(RandomGraph::BarabasiAlbert { n: 20, m0: 3, m: 2 }, 5).unwrap();
        let base = CascadeConfig { shocked: vec![0], loss_fraction: 0.6, thresholds: None, policy: LinkPolicy::None };
        let none = cascade(&g, &base, 9).unwrap();
        let peri = cascade(&g, &CascadeConfig { policy: LinkPolicy::OrganizedPeriphery(15), ..base.clone() }, 9).unwrap();
        assert_eq!(peri.added_links.len(), 15);
        assert!(peri.failed.len() >= none.failed.len());
        let rand1 = cascade(&g, &CascadeConfig { policy: LinkPolicy::Random(15), ..base.clone() }, 9).unwrap();
        let rand2 = cascade(&g, &CascadeConfig { policy: LinkPolicy::Random(15), ..base }, 9).unwrap();
        assert_eq!(rand1, rand2);
    }
}
