use num_rational::Ratio;

use super::{EdgeField, EvolveOptions, Scheme, Stepper, TransportSystem};
use crate::graph::{cycle_period, strong_components, Digraph, Edge, TravelTime};
use crate::Result;

/// Horizon for time averages, in units of the total traversal time.
pub const AVERAGING_TRAVERSALS: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Behaviour {
    /// Commensurable cycle times: the component repeats with period `tau`.
    /// `error` is the max-norm difference between the fields one period
    /// apart at the end of the simulated horizon.
    Periodic { tau: Ratio<i64>, error: f64 },
    /// Convergence to a one-dimensional projection. `masses` are the
    /// time-averaged edge masses, `error_bar` the gap between the last two
    /// window means and `window_variance` the per-window temporal variance
    /// of the field.
    Equilibrium { masses: Vec<f64>, error_bar: f64, window_variance: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalComponent {
    /// Edges of the component, ascending.
    pub edges: Vec<usize>,
    pub behaviour: Behaviour,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransientClass {
    /// Not fed by any cycle; mass leaves in finite time. `t0` is the
    /// observed extinction time, `None` if mass remained at the horizon.
    Nilpotent { t0: Option<f64> },
    /// Fed by a non-terminal cycle; mass decays without vanishing.
    Stable { final_mass: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub components: Vec<TerminalComponent>,
    /// `(edge, class)` for every edge outside the terminal components.
    pub transient: Vec<(usize, TransientClass)>,
    pub scheme: Scheme,
    pub horizon: f64,
}

/// Edge groups of the transfer digraph: terminal components and the edges
/// downstream of non-terminal cycles.
pub(crate) struct Structure {
    pub terminal: Vec<Vec<usize>>,
    pub stable: Vec<bool>,
    pub in_terminal: Vec<bool>,
}

pub(crate) fn structure(ts: &TransportSystem) -> Structure {
    let line = ts.transfer_digraph();
    let m = ts.edge_count();
    let comps = strong_components(&line);
    let cyclic = |vs: &[usize]| vs.len() > 1 || line.find_edge(vs[0], vs[0]).is_some();
    let mut in_terminal = vec![false; m];
    let mut terminal = Vec::new();
    let mut sources = Vec::new();
    for c in &comps {
        if c.terminal {
            for &v in &c.vertices {
                in_terminal[v] = true;
            }
            terminal.push(c.vertices.clone());
        } else if cyclic(&c.vertices) {
            sources.extend(c.vertices.iter().copied());
        }
    }
    // everything reachable from a non-terminal cycle, outside terminal parts
    let mut stable = vec![false; m];
    let mut stack = sources;
    while let Some(v) = stack.pop() {
        if stable[v] || in_terminal[v] {
            continue;
        }
        stable[v] = true;
        for &e in line.out_edges(v) {
            stack.push(line.edge(e).head);
        }
    }
    Structure { terminal, stable, in_terminal }
}

/// Period of a terminal component, `None` when a travel time is irrational.
pub(crate) fn component_period(ts: &TransportSystem, edges: &[usize]) -> Result<Option<Ratio<i64>>> {
    let line = ts.transfer_digraph();
    let index = |v: usize| edges.binary_search(&v).ok();
    let mut arcs = Vec::new();
    let mut times: Vec<TravelTime> = Vec::new();
    for e in line.edges() {
        if let (Some(a), Some(b)) = (index(e.tail), index(e.head)) {
            arcs.push(Edge::new(a, b, e.weight));
            times.push(ts.speeds()[e.tail].travel_time());
        }
    }
    let sub = Digraph::new(edges.len(), arcs)?;
    Ok(cycle_period(&sub, &times)?.map(|p| p.tau))
}

fn steps_of(tau: &Ratio<i64>, dt: f64) -> u64 {
    (*tau.numer() as f64 / *tau.denom() as f64 / dt).round() as u64
}

/// Long-time behaviour of the solution from `f`.
pub fn asymptotics(ts: &TransportSystem, f: &EdgeField, opts: &EvolveOptions) -> Result<AsymptoticReport> {
    let st = structure(ts);
    let periods = st
        .terminal
        .iter()
        .map(|edges| component_period(ts, edges))
        .collect::<Result<Vec<_>>>()?;
    let mut stepper = Stepper::new(ts, f, opts)?;
    let dt = stepper.dt();
    let traversal = ts.traversal_time();
    let horizon_steps = ((AVERAGING_TRAVERSALS * traversal) / dt).ceil() as u64;
    let max_period_steps = periods
        .iter()
        .flatten()
        .map(|tau| steps_of(tau, dt))
        .max()
        .unwrap_or(0);
    let window_steps = ((traversal / dt).ceil() as u64).max(1);
    let total_steps = horizon_steps.max(max_period_steps + 1);
    let m = ts.edge_count();
    let exact = stepper.scheme() == Scheme::Exact;
    let total_mass = f.mass().abs().max(f64::MIN_POSITIVE);
    let vanished = |mass: f64| if exact { mass == 0.0 } else { mass.abs() <= 1e-12 * total_mass };

    // last time each edge carried mass
    let mut last_alive: Vec<Option<f64>> = stepper.edge_masses().iter().map(|&x| (!vanished(x)).then_some(0.0)).collect();
    let mut alive_at_end = vec![false; m];
    // trapezoidal window averages of the edge masses over the second half
    let half = total_steps / 2;
    let mut window_sums: Vec<Vec<f64>> = Vec::new();
    let mut window_variance: Vec<f64> = Vec::new();
    let cells = f.cells;
    let mut cell_sum = vec![0.0; m * cells];
    let mut cell_sq = vec![0.0; m * cells];
    let mut samples = 0u64;
    let need_variance = periods.iter().any(|p| p.is_none());
    let mut prev_masses = stepper.edge_masses();
    let mut snapshots: Vec<(u64, EdgeField)> = Vec::new();
    let snapshot_steps: Vec<u64> = std::iter::once(total_steps)
        .chain(periods.iter().flatten().map(|tau| total_steps - steps_of(tau, dt)))
        .collect();
    for s in 1..=total_steps {
        stepper.step();
        let masses = stepper.edge_masses();
        for j in 0..m {
            if !vanished(masses[j]) {
                last_alive[j] = Some(stepper.time());
            }
            if s == total_steps {
                alive_at_end[j] = !vanished(masses[j]);
            }
        }
        if s > half {
            let w = ((s - half - 1) / window_steps) as usize;
            if window_sums.len() <= w {
                window_sums.push(vec![0.0; m]);
            }
            for j in 0..m {
                window_sums[w][j] += 0.5 * (prev_masses[j] + masses[j]) * dt;
            }
            if need_variance {
                let field = stepper.field();
                for (k, &v) in field.values.iter().flatten().enumerate() {
                    cell_sum[k] += v;
                    cell_sq[k] += v * v;
                }
            }
            samples += 1;
            if (s - half).is_multiple_of(window_steps) {
                // mean over cells of the temporal variance within the window
                let n = samples as f64;
                let var = cell_sum
                    .iter()
                    .zip(&cell_sq)
                    .map(|(a, b)| (b / n - (a / n) * (a / n)).max(0.0))
                    .sum::<f64>()
                    / (m * cells) as f64;
                window_variance.push(var);
                cell_sum.iter_mut().for_each(|x| *x = 0.0);
                cell_sq.iter_mut().for_each(|x| *x = 0.0);
                samples = 0;
            }
        }
        if snapshot_steps.contains(&s) {
            snapshots.push((s, stepper.field()));
        }
        prev_masses = masses;
    }
    let horizon = stepper.time();
    // only complete windows count
    window_sums.truncate(window_variance.len());
    let window_len = window_steps as f64 * dt;

    let snapshot = |step: u64| snapshots.iter().find(|(s, _)| *s == step).map(|(_, f)| f);
    let end_field = snapshot(total_steps).cloned().unwrap_or_else(|| stepper.field());
    let mut components = Vec::new();
    for (edges, period) in st.terminal.iter().zip(&periods) {
        let behaviour = match period {
            Some(tau) => {
                let back = total_steps - steps_of(tau, dt);
                let earlier = snapshot(back).expect("snapshot taken");
                let error = edges
                    .iter()
                    .flat_map(|&j| end_field.values[j].iter().zip(&earlier.values[j]).map(|(a, b)| (a - b).abs()))
                    .fold(0.0, f64::max);
                Behaviour::Periodic { tau: *tau, error }
            }
            None => {
                let means: Vec<Vec<f64>> =
                    window_sums.iter().map(|w| edges.iter().map(|&j| w[j] / window_len).collect()).collect();
                let count = means.len().max(1) as f64;
                let masses: Vec<f64> =
                    (0..edges.len()).map(|i| means.iter().map(|w| w[i]).sum::<f64>() / count).collect();
                let error_bar = match means.len() {
                    n if n >= 2 => means[n - 1]
                        .iter()
                        .zip(&means[n - 2])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                    _ => f64::NAN,
                };
                let window_variance = window_variance.clone();
                Behaviour::Equilibrium { masses, error_bar, window_variance }
            }
        };
        components.push(TerminalComponent { edges: edges.clone(), behaviour });
    }
    let final_masses = stepper.edge_masses();
    let transient = (0..m)
        .filter(|&j| !st.in_terminal[j])
        .map(|j| {
            let class = if st.stable[j] {
                TransientClass::Stable { final_mass: final_masses[j] }
            } else if alive_at_end[j] {
                TransientClass::Nilpotent { t0: None }
            } else {
                TransientClass::Nilpotent { t0: Some(last_alive[j].unwrap_or(0.0)) }
            };
            (j, class)
        })
        .collect();
    Ok(AsymptoticReport { components, transient, scheme: stepper.scheme(), horizon })
}
