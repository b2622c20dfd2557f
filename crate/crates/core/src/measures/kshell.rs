use crate::graph::Digraph;

/// Shell index of every vertex in the simple undirected view of `g`
/// (directions dropped, loops and duplicate arcs ignored).
///
/// Bucket-based peeling: vertices are processed in non-decreasing order of
/// their current degree, which is lowered for unprocessed neighbours.
pub fn k_shells(g: &Digraph) -> Vec<usize> {
    let nbrs = g.simple_neighbours();
    let n = nbrs.len();
    let mut deg: Vec<usize> = nbrs.iter().map(|l| l.len()).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // vertices sorted by degree, with bin starts and positions
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &deg {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    let mut fill = bin.clone();
    for v in 0..n {
        pos[v] = fill[deg[v]];
        order[pos[v]] = v;
        fill[deg[v]] += 1;
    }

    for i in 0..n {
        let v = order[i];
        for &u in &nbrs[v] {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}
