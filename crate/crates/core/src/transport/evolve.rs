use std::collections::VecDeque;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{EdgeField, TransportSystem};
use crate::{Error, Result};

/// Largest number of fine cells the exact scheme will allocate.
pub const MAX_EXACT_CELLS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact when every velocity is rational and the grid is affordable,
    /// upwind otherwise.
    #[default]
    Auto,
    /// Characteristics on a grid where each edge shifts by one fine cell per
    /// step; no numerical dissipation.
    Exact,
    /// First-order upwind finite volumes.
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub scheme: Scheme,
    /// Time step; in exact mode it must divide the natural step.
    pub dt: Option<f64>,
    /// Upwind Courant number used when `dt` is not given.
    pub cfl: f64,
    /// Interval between recorded frames; only the end points when `None`.
    pub sample_every: Option<f64>,
    /// Reject negative initial data.
    pub enforce_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { scheme: Scheme::Auto, dt: None, cfl: 0.9, sample_every: None, enforce_positivity: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportTrajectory {
    pub scheme: Scheme,
    pub dt: f64,
    pub times: Vec<f64>,
    pub frames: Vec<EdgeField>,
}

enum State {
    /// Fine cells per edge, front = s = 0; each coarse cell holds `refine[j]`
    /// fine cells.
    Exact { cells: Vec<VecDeque<f64>>, refine: Vec<usize> },
    Upwind { cells: Vec<Vec<f64>> },
}

/// Time stepper shared by evolution and the long-horizon analyses.
pub struct Stepper<'a> {
    ts: &'a TransportSystem,
    coarse: usize,
    state: State,
    dt: f64,
    steps: u64,
    speeds: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(ts: &'a TransportSystem, f: &EdgeField, opts: &EvolveOptions) -> Result<Self> {
        let m = ts.edge_count();
        if f.edges() != m {
            return Err(Error::DimMismatch(format!("initial data on {} edges, system has {m}", f.edges())));
        }
        if opts.enforce_positivity {
            for (j, row) in f.values.iter().enumerate() {
                if let Some(i) = row.iter().position(|&v| v < 0.0) {
                    return Err(Error::NegativeInput { edge: j + 1, cell: i + 1 });
                }
            }
        }
        let speeds = ts.speed_values();
        let scheme = match opts.scheme {
            Scheme::Auto if exact_refinement(ts, f.cells).is_some() => Scheme::Exact,
            Scheme::Auto => Scheme::Upwind,
            s => s,
        };
        let (state, dt) = match scheme {
            Scheme::Exact => {
                let (refine, base_dt) = exact_refinement(ts, f.cells).ok_or_else(|| {
                    Error::GridMismatch(if ts.all_rational() {
                        "exact grid exceeds the cell budget".into()
                    } else {
                        "exact mode needs rational velocities".into()
                    })
                })?;
                let k = match opts.dt {
                    None => 1,
                    Some(dt) => {
                        let k = (base_dt / dt).round();
                        if k < 1.0 || ((base_dt / k) - dt).abs() > 1e-12 * dt {
                            return Err(Error::GridMismatch(format!(
                                "dt = {dt} does not divide the exact step {base_dt}"
                            )));
                        }
                        k as usize
                    }
                };
                let refine: Vec<usize> = refine.iter().map(|r| r * k).collect();
                let total: usize = refine.iter().map(|r| r * f.cells).sum();
                if total > MAX_EXACT_CELLS {
                    return Err(Error::GridMismatch("exact grid exceeds the cell budget".into()));
                }
                let cells = f
                    .values
                    .iter()
                    .zip(&refine)
                    .map(|(row, &r)| row.iter().flat_map(|&v| std::iter::repeat_n(v, r)).collect())
                    .collect();
                (State::Exact { cells, refine }, base_dt / k as f64)
            }
            Scheme::Upwind | Scheme::Auto => {
                let h = 1.0 / f.cells as f64;
                let cmax = speeds.iter().copied().fold(0.0, f64::max);
                let limit = h / cmax;
                let dt = match opts.dt {
                    Some(dt) if dt > limit * (1.0 + 1e-12) => return Err(Error::CflViolation { dt, limit }),
                    Some(dt) if dt > 0.0 => dt,
                    Some(dt) => return Err(Error::InvalidParams(format!("dt = {dt}"))),
                    None => opts.cfl.clamp(1e-6, 1.0) * limit,
                };
                (State::Upwind { cells: f.values.clone() }, dt)
            }
        };
        Ok(Self { ts, coarse: f.cells, state, dt, steps: 0, speeds })
    }

    pub fn scheme(&self) -> Scheme {
        match self.state {
            State::Exact { .. } => Scheme::Exact,
            State::Upwind { .. } => Scheme::Upwind,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn step(&mut self) {
        let m = self.ts.edge_count();
        match &mut self.state {
            State::Exact { cells, .. } => {
                let leaving: Vec<f64> = cells.iter_mut().map(|c| c.pop_front().expect("edge has cells")).collect();
                let mut inflow = vec![0.0; m];
                for (k, &v) in leaving.iter().enumerate() {
                    if v != 0.0 {
                        let flux = self.speeds[k] * v;
                        for &(j, w) in self.ts.successors(k) {
                            inflow[j] += w * flux;
                        }
                    }
                }
                for j in 0..m {
                    cells[j].push_back(inflow[j] / self.speeds[j]);
                }
            }
            State::Upwind { cells } => {
                let h = 1.0 / self.coarse as f64;
                let mut ghost = vec![0.0; m];
                for k in 0..m {
                    let flux = self.speeds[k] * cells[k][0];
                    for &(j, w) in self.ts.successors(k) {
                        ghost[j] += w * flux;
                    }
                }
                for j in 0..m {
                    let nu = self.speeds[j] * self.dt / h;
                    let g = ghost[j] / self.speeds[j];
                    let row = &mut cells[j];
                    let n = row.len();
                    for i in 0..n {
                        let next = if i + 1 < n { row[i + 1] } else { g };
                        row[i] += nu * (next - row[i]);
                    }
                }
            }
        }
        self.steps += 1;
    }

    /// Current cell averages on the coarse grid.
    pub fn field(&self) -> EdgeField {
        match &self.state {
            State::Exact { cells, refine } => EdgeField {
                cells: self.coarse,
                values: cells
                    .iter()
                    .zip(refine)
                    .map(|(c, &r)| {
                        let (a, b) = c.as_slices();
                        let fine: Vec<f64> = a.iter().chain(b).copied().collect();
                        fine.chunks(r).map(|ch| ch.iter().sum::<f64>() / r as f64).collect()
                    })
                    .collect(),
            },
            State::Upwind { cells } => EdgeField { cells: self.coarse, values: cells.clone() },
        }
    }

    /// `∫₀¹ u_j ds` for every edge.
    pub fn edge_masses(&self) -> Vec<f64> {
        match &self.state {
            State::Exact { cells, .. } => cells.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect(),
            State::Upwind { cells } => cells.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect(),
        }
    }
}

/// Per-edge refinement and step for the exact scheme: with `c_j = p_j/q_j`
/// and `L = lcm(p_j)`, the step `1/(G·L)` moves edge j by one of its
/// `G·(L/p_j)·q_j` fine cells.
fn exact_refinement(ts: &TransportSystem, coarse: usize) -> Option<(Vec<usize>, f64)> {
    let exact: Option<Vec<_>> = ts.speeds().iter().map(|s| s.exact()).collect();
    let exact = exact?;
    let l = exact.iter().try_fold(1i64, |acc, r| {
        let g = acc.gcd(r.numer());
        (acc / g).checked_mul(*r.numer())
    })?;
    let refine: Option<Vec<usize>> = exact
        .iter()
        .map(|r| (l / r.numer()).checked_mul(*r.denom()).and_then(|x| usize::try_from(x).ok()))
        .collect();
    let refine = refine?;
    let total = refine.iter().try_fold(0usize, |acc, &r| acc.checked_add(r.checked_mul(coarse)?))?;
    if total > MAX_EXACT_CELLS {
        return None;
    }
    Some((refine, 1.0 / (coarse as f64 * l as f64)))
}

/// Evolves `f` to `t_end`, recording frames every `sample_every`.
pub fn evolve(ts: &TransportSystem, f: &EdgeField, t_end: f64, opts: &EvolveOptions) -> Result<TransportTrajectory> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParams(format!("t_end = {t_end}")));
    }
    let mut stepper = Stepper::new(ts, f, opts)?;
    let dt = stepper.dt();
    let to_steps = |t: f64, what: &str| -> Result<u64> {
        let n = (t / dt).round();
        if stepper.scheme() == Scheme::Exact && (n * dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::GridMismatch(format!("{what} = {t} is not a multiple of the exact step {dt}")));
        }
        Ok(n.max(0.0) as u64)
    };
    let total = if stepper.scheme() == Scheme::Exact { to_steps(t_end, "t_end")? } else { (t_end / dt).ceil() as u64 };
    let every = match opts.sample_every {
        Some(s) if s > 0.0 => to_steps(s, "sample interval")?.max(1),
        _ => total.max(1),
    };
    let mut times = vec![0.0];
    let mut frames = vec![f.clone()];
    if stepper.scheme() == Scheme::Upwind && total > 0 {
        // stretch the last step onto t_end by shrinking all steps uniformly
        let uniform = t_end / total as f64;
        stepper.dt = uniform;
    }
    for s in 1..=total {
        stepper.step();
        if s % every == 0 || s == total {
            times.push(if s == total { t_end } else { stepper.time() });
            frames.push(stepper.field());
        }
    }
    Ok(TransportTrajectory { scheme: stepper.scheme(), dt: stepper.dt(), times, frames })
}
