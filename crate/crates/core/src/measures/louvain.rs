use std::collections::BTreeMap;

use crate::graph::Digraph;

/// Community labels (0-based, numbered in order of first appearance) and the
/// modularity of the partition on the input graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub modularity: f64,
    /// Modularity after every local-move sweep, across all levels.
    pub sweep_modularity: Vec<f64>,
    pub levels: usize,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// Symmetric weighted adjacency used by modularity: A_w = A⁺_w + A⁻_w, kept
/// as sorted neighbour lists with the diagonal stored separately.
#[derive(Debug, Clone)]
struct Level {
    nbrs: Vec<Vec<(usize, f64)>>,
    self_w: Vec<f64>,
}

impl Level {
    fn from_digraph(g: &Digraph) -> Self {
        let n = g.vertex_count();
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        let mut self_w = vec![0.0; n];
        for e in g.edges() {
            if e.is_loop() {
                self_w[e.tail] += 2.0 * e.weight;
            } else {
                *maps[e.tail].entry(e.head).or_insert(0.0) += e.weight;
                *maps[e.head].entry(e.tail).or_insert(0.0) += e.weight;
            }
        }
        Self { nbrs: maps.into_iter().map(|m| m.into_iter().collect()).collect(), self_w }
    }

    fn len(&self) -> usize {
        self.self_w.len()
    }

    fn strength(&self, i: usize) -> f64 {
        self.self_w[i] + self.nbrs[i].iter().map(|p| p.1).sum::<f64>()
    }

    fn total(&self) -> f64 {
        (0..self.len()).map(|i| self.strength(i)).sum()
    }

    fn modularity(&self, labels: &[usize]) -> f64 {
        let m2 = self.total();
        if m2 == 0.0 {
            return 0.0;
        }
        let k: Vec<f64> = (0..self.len()).map(|i| self.strength(i)).collect();
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut inner = vec![0.0; count];
        let mut tot = vec![0.0; count];
        for i in 0..self.len() {
            inner[labels[i]] += self.self_w[i];
            for &(j, w) in &self.nbrs[i] {
                if labels[j] == labels[i] {
                    inner[labels[i]] += w;
                }
            }
            tot[labels[i]] += k[i];
        }
        inner.iter().zip(&tot).map(|(a, t)| a / m2 - (t / m2) * (t / m2)).sum()
    }

    fn aggregate(&self, labels: &[usize], count: usize) -> Level {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        let mut self_w = vec![0.0; count];
        for i in 0..self.len() {
            self_w[labels[i]] += self.self_w[i];
            for &(j, w) in &self.nbrs[i] {
                if labels[i] == labels[j] {
                    self_w[labels[i]] += w;
                } else {
                    *maps[labels[i]].entry(labels[j]).or_insert(0.0) += w;
                }
            }
        }
        Level { nbrs: maps.into_iter().map(|m| m.into_iter().collect()).collect(), self_w }
    }
}

/// Modularity `Q = (1/2W) Σ_ij [a_ij − W_i W_j / 2W] δ(c_i, c_j)` on the
/// undirected weighted adjacency A_w = A⁺_w + A⁻_w.
pub fn modularity(g: &Digraph, labels: &[usize]) -> f64 {
    Level::from_digraph(g).modularity(labels)
}

/// Deterministic Louvain: ascending sweep order, moves only on strictly
/// positive gain, ties resolved towards the lowest community index.
pub fn louvain(g: &Digraph) -> Partition {
    let mut level = Level::from_digraph(g);
    let m2 = level.total();
    let n = g.vertex_count();
    let mut membership: Vec<usize> = (0..n).collect();
    let mut sweeps = Vec::new();
    let mut levels = 0;
    if m2 == 0.0 {
        return Partition { labels: membership, modularity: 0.0, sweep_modularity: sweeps, levels };
    }
    loop {
        levels += 1;
        let (labels, moved) = local_moves(&level, m2, &mut sweeps);
        let (labels, count) = renumber(&labels);
        for c in membership.iter_mut() {
            *c = labels[*c];
        }
        if !moved || count == level.len() {
            break;
        }
        level = level.aggregate(&labels, count);
    }
    let (labels, _) = renumber(&membership);
    let modularity = modularity(g, &labels);
    Partition { labels, modularity, sweep_modularity: sweeps, levels }
}

fn local_moves(level: &Level, m2: f64, sweeps: &mut Vec<f64>) -> (Vec<usize>, bool) {
    let n = level.len();
    let k: Vec<f64> = (0..n).map(|i| level.strength(i)).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = k.clone();
    let mut any_move = false;
    let eps = 1e-14 * m2;
    loop {
        let mut moved = false;
        for i in 0..n {
            let old = comm[i];
            tot[old] -= k[i];
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            links.insert(old, 0.0);
            for &(j, w) in &level.nbrs[i] {
                *links.entry(comm[j]).or_insert(0.0) += w;
            }
            let gain = |c: usize, kin: f64| kin - tot[c] * k[i] / m2;
            let stay = gain(old, links[&old]);
            let mut best = old;
            let mut best_gain = stay;
            for (&c, &kin) in &links {
                let gc = gain(c, kin);
                if gc > best_gain + eps {
                    best = c;
                    best_gain = gc;
                }
            }
            if best_gain <= stay + eps {
                best = old;
            }
            tot[best] += k[i];
            if best != old {
                comm[i] = best;
                moved = true;
                any_move = true;
            }
        }
        let (labels, _) = renumber(&comm);
        sweeps.push(level.modularity(&labels));
        if !moved {
            break;
        }
    }
    (comm, any_move)
}

fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let next = map.len();
        out.push(*map.entry(l).or_insert(next));
    }
    (out, map.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_triangles() -> Digraph {
        Digraph::undirected(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 1.0)],
        )
        .unwrap()
    }

    /// Maximum modularity over all set partitions (restricted growth strings).
    fn exhaustive_max(g: &Digraph) -> f64 {
        fn rec(g: &Digraph, labels: &mut Vec<usize>, max_label: usize, best: &mut f64) {
            if labels.len() == g.vertex_count() {
                *best = best.max(modularity(g, labels));
                return;
            }
            for l in 0..=max_label + 1 {
                labels.push(l);
                rec(g, labels, max_label.max(l), best);
                labels.pop();
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(g, &mut vec![0], 0, &mut best);
        best
    }

    /// Direct evaluation of the double sum.
    fn modularity_double_sum(g: &Digraph, labels: &[usize]) -> f64 {
        let ops = crate::graph::operator_suite(g);
        let a = ops.adj;
        let n = g.vertex_count();
        let two_w: f64 = g.weights().iter().sum::<f64>() * 2.0;
        let wv: Vec<f64> = (0..n).map(|i| ops.deg_in[(i, i)] + ops.deg_out[(i, i)]).collect();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if labels[i] == labels[j] {
                    q += a[(i, j)] - wv[i] * wv[j] / two_w;
                }
            }
        }
        q / two_w
    }

    #[test]
    fn bridged_triangles_split() {
        let g = two_triangles();
        let p = louvain(&g);
        assert_eq!(p.labels, vec![0, 0, 0, 1, 1, 1]);
        assert!((p.modularity - exhaustive_max(&g)).abs() < 1e-12);
    }

    #[test]
    fn single_clique_is_one_community() {
        let g = Digraph::undirected(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
            .unwrap();
        let p = louvain(&g);
        assert_eq!(p.labels, vec![0; 4]);
        assert!((p.modularity - modularity_double_sum(&g, &p.labels)).abs() < 1e-15);
        assert!(p.modularity.abs() < 1e-15);
    }

    #[test]
    fn disconnected_cliques() {
        let g = Digraph::undirected(6, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)])
            .unwrap();
        assert_eq!(louvain(&g).labels, vec![0, 0, 0, 1, 1, 1]);
    }

    proptest! {
        #[test]
        fn sweeps_never_decrease_modularity(
            links in proptest::collection::btree_map((0usize..12, 0usize..12), 0.1f64..3.0, 1..40)
        ) {
            let mut links: Vec<_> = links.into_iter().filter(|((a, b), _)| a != b)
                .map(|((a, b), w)| (a.min(b), a.max(b), w)).collect();
            links.sort_by_key(|&(a, b, _)| (a, b));
            links.dedup_by_key(|l| (l.0, l.1));
            prop_assume!(!links.is_empty());
            let g = Digraph::undirected(12, &links).unwrap();
            let p = louvain(&g);
            for w in p.sweep_modularity.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", p.sweep_modularity);
            }
            let singletons: Vec<usize> = (0..12).collect();
            prop_assert!(p.modularity >= modularity(&g, &singletons) - 1e-12);
            prop_assert!((p.modularity - modularity_double_sum(&g, &p.labels)).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&p.modularity));
        }
    }
}
