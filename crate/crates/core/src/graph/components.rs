use std::collections::VecDeque;

use num_integer::Integer;
use num_rational::Ratio;

use super::Digraph;
use crate::{Error, Result};

/// A strongly connected component. `terminal` is set when no edge leaves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub terminal: bool,
}

/// Strongly connected components (iterative Tarjan), each sorted, listed by
/// smallest member.
pub fn strong_components(g: &Digraph) -> Vec<Component> {
    let n = g.vertex_count();
    let comp = component_labels(g);
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for v in 0..n {
        members[comp[v]].push(v);
    }
    let mut terminal = vec![true; count];
    for e in g.edges() {
        if comp[e.tail] != comp[e.head] {
            terminal[comp[e.tail]] = false;
        }
    }
    let mut out: Vec<Component> = members
        .into_iter()
        .zip(terminal)
        .map(|(vertices, terminal)| Component { vertices, terminal })
        .collect();
    out.sort_by_key(|c| c.vertices[0]);
    out
}

/// Component label per vertex, labels in Tarjan completion order.
pub fn component_labels(g: &Digraph) -> Vec<usize> {
    let n = g.vertex_count();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // frames of (vertex, position in its out-edge list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let outs = g.out_edges(v);
            if *pos < outs.len() {
                let w = g.edge(outs[*pos]).head;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Travel time of an edge for the commensurability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TravelTime {
    Rational(Ratio<i64>),
    /// Caller-asserted irrational time; floating point cannot certify this.
    Irrational,
}

/// Common period of all cycle travel times in a strongly connected digraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclePeriod {
    /// Least common denominator of the edge travel times.
    pub d: i64,
    /// gcd of all cycle travel times.
    pub tau: Ratio<i64>,
}

/// Greatest common divisor of the travel times of all directed cycles.
///
/// Integer potentials are assigned along a BFS tree of the scaled times; the
/// potential defect of every edge is the time of its fundamental cycle, and
/// the gcd of these equals the gcd over all cycles. Returns `None` as soon as
/// one travel time is irrational.
pub fn cycle_period(g: &Digraph, times: &[TravelTime]) -> Result<Option<CyclePeriod>> {
    if times.len() != g.edge_count() {
        return Err(Error::DimMismatch(format!(
            "{} travel times for {} edges",
            times.len(),
            g.edge_count()
        )));
    }
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    if g.edge_count() == 0 {
        return Err(Error::InvalidGraph("graph without cycles has no period".into()));
    }
    let mut rational = Vec::with_capacity(times.len());
    for t in times {
        match t {
            TravelTime::Irrational => return Ok(None),
            TravelTime::Rational(r) if *r.numer() <= 0 => {
                return Err(Error::InvalidParams(format!("travel time {r} is not positive")))
            }
            TravelTime::Rational(r) => rational.push(*r),
        }
    }
    let d = rational.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
    let scaled: Vec<i128> =
        rational.iter().map(|r| (*r.numer() as i128) * ((d / r.denom()) as i128)).collect();

    let n = g.vertex_count();
    let mut potential: Vec<Option<i128>> = vec![None; n];
    potential[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let pv = potential[v].expect("queued vertices are labelled");
        for &j in g.out_edges(v) {
            let h = g.edge(j).head;
            if potential[h].is_none() {
                potential[h] = Some(pv + scaled[j]);
                queue.push_back(h);
            }
        }
    }
    let mut gcd: i128 = 0;
    for (j, e) in g.edges().iter().enumerate() {
        let defect = potential[e.tail].unwrap() + scaled[j] - potential[e.head].unwrap();
        gcd = gcd.gcd(&defect.abs());
    }
    let gcd = i64::try_from(gcd)
        .map_err(|_| Error::InvalidParams("cycle times overflow 64-bit integers".into()))?;
    Ok(Some(CyclePeriod { d, tau: Ratio::new(gcd, d) }))
}
