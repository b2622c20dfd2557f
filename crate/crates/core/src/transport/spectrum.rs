use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::TransportSystem;
use crate::linalg::{null_vector, C64};
use crate::{Error, Result};

/// Subdivision depth budget.
pub const MAX_DEPTH: usize = 40;
/// Newton step tolerance.
pub const NEWTON_TOL: f64 = 1e-12;

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]` in ℂ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self { re_min, re_max, im_min, im_max };
        if !(re_min < re_max && im_min < im_max) || [re_min, re_max, im_min, im_max].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("region {r:?} is empty or unbounded")));
        }
        Ok(r)
    }

    fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.re_min - slack && z.re <= self.re_max + slack && z.im >= self.im_min - slack && z.im <= self.im_max + slack
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn centre(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn grow(&self, eps: f64) -> Self {
        Self { re_min: self.re_min - eps, re_max: self.re_max + eps, im_min: self.im_min - eps, im_max: self.im_max + eps }
    }
}

/// Eigenvalue λ of the transport generator with the vector `d` defining the
/// eigenfunction `g_j(s) = e^{λs/c_j} d_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: C64,
    pub d: DVector<C64>,
}

struct Characteristic {
    c: Vec<f64>,
    bc: DMatrix<C64>,
}

impl Characteristic {
    fn new(ts: &TransportSystem) -> Self {
        Self { c: ts.speed_values(), bc: ts.boundary_matrix().map(|x| C64::new(x, 0.0)) }
    }

    /// `I − E_λ(−1) B_C`.
    fn matrix(&self, lambda: C64) -> DMatrix<C64> {
        let m = self.c.len();
        DMatrix::from_fn(m, m, |j, k| {
            let e = (-lambda / self.c[j]).exp();
            let id = if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            id - e * self.bc[(j, k)]
        })
    }

    fn det(&self, lambda: C64) -> C64 {
        self.matrix(lambda).lu().determinant()
    }

    /// Newton step `f/f'` with `f'/f = tr(M⁻¹ M')`.
    fn newton_step(&self, lambda: C64) -> Option<C64> {
        let m = self.c.len();
        let mat = self.matrix(lambda);
        let deriv = DMatrix::from_fn(m, m, |j, k| (-lambda / self.c[j]).exp() / self.c[j] * self.bc[(j, k)]);
        let x = mat.lu().solve(&deriv)?;
        let tr = x.trace();
        if tr.norm() == 0.0 || !tr.is_finite() {
            return None;
        }
        Some(C64::new(1.0, 0.0) / tr)
    }

    /// Largest rate at which the phase of the determinant can turn along a
    /// line, used to seed the boundary sampling.
    fn phase_rate(&self) -> f64 {
        self.c.iter().map(|c| 1.0 / c).sum()
    }
}

/// Winding number of `det` along the rectangle boundary, or `None` when a
/// root lies (numerically) on it.
fn winding(ch: &Characteristic, r: &Region) -> Option<i64> {
    let corners = [
        C64::new(r.re_min, r.im_min),
        C64::new(r.re_max, r.im_min),
        C64::new(r.re_max, r.im_max),
        C64::new(r.re_min, r.im_max),
    ];
    let max_step = 0.2 / ch.phase_rate();
    let mut total = 0.0;
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        let pieces = (((b - a).norm() / max_step).ceil() as usize).clamp(8, 200_000);
        let mut za = a;
        let mut fa = ch.det(za);
        for p in 1..=pieces {
            let zb = a + (b - a) * (p as f64 / pieces as f64);
            let fb = ch.det(zb);
            total += phase_change(ch, za, fa, zb, fb, 0)?;
            za = zb;
            fa = fb;
        }
    }
    let w = total / std::f64::consts::TAU;
    let rounded = w.round();
    if (w - rounded).abs() > 0.1 {
        return None;
    }
    Some(rounded as i64)
}

fn phase_change(ch: &Characteristic, za: C64, fa: C64, zb: C64, fb: C64, depth: usize) -> Option<f64> {
    if fa.norm() < 1e-13 || fb.norm() < 1e-13 || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let d = (fb / fa).arg();
    if d.abs() < 0.5 {
        return Some(d);
    }
    if depth > 30 {
        return None;
    }
    let zm = (za + zb) * 0.5;
    let fm = ch.det(zm);
    Some(phase_change(ch, za, fa, zm, fm, depth + 1)? + phase_change(ch, zm, fm, zb, fb, depth + 1)?)
}

fn newton(ch: &Characteristic, start: C64) -> Option<C64> {
    let mut z = start;
    for _ in 0..100 {
        let step = match ch.newton_step(z) {
            Some(s) => s,
            // exactly singular: z is a root
            None => return Some(z),
        };
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() <= NEWTON_TOL * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

fn split(r: &Region, attempt: usize) -> (Region, Region) {
    // off-centre cuts keep symmetric root sets off the cut lines
    let t = [0.4873, 0.5311, 0.4419, 0.5737, 0.3961][attempt % 5];
    if r.re_max - r.re_min >= r.im_max - r.im_min {
        let x = r.re_min + t * (r.re_max - r.re_min);
        (Region { re_max: x, ..*r }, Region { re_min: x, ..*r })
    } else {
        let y = r.im_min + t * (r.im_max - r.im_min);
        (Region { im_max: y, ..*r }, Region { im_min: y, ..*r })
    }
}

/// Eigenvalues of the transport generator inside `region`, by argument
/// principle subdivision of `det(I − E_λ(−1)B_C)` and Newton polishing.
/// Multiple roots are repeated. Sorted by imaginary part, then real part.
pub fn spectrum(ts: &TransportSystem, region: &Region, tol: f64) -> Result<Vec<Eigenpair>> {
    let ch = Characteristic::new(ts);
    let tol = tol.max(1e-14);
    let mut outer = *region;
    let mut count = None;
    for k in 0..4 {
        count = winding(&ch, &outer);
        if count.is_some() {
            break;
        }
        outer = region.grow(region.diameter() * 1e-9 * 10f64.powi(k));
    }
    let count = count.ok_or_else(|| Error::ToleranceNotMet("cannot count roots on the region boundary".into()))?;
    let mut roots: Vec<C64> = Vec::new();
    let mut stack = vec![(outer, count, 0usize)];
    while let Some((r, n, depth)) = stack.pop() {
        if n <= 0 {
            continue;
        }
        if n == 1 {
            if let Some(z) = newton(&ch, r.centre()) {
                if r.contains(z, 0.0) {
                    roots.push(z);
                    continue;
                }
            }
        }
        if r.diameter() <= tol {
            let z = newton(&ch, r.centre()).filter(|z| r.contains(*z, r.diameter())).unwrap_or(r.centre());
            roots.extend(std::iter::repeat_n(z, n as usize));
            continue;
        }
        if depth >= MAX_DEPTH {
            return Err(Error::ToleranceNotMet(format!(
                "subdivision depth {MAX_DEPTH} exhausted near {} with {n} roots",
                r.centre()
            )));
        }
        let mut done = false;
        for attempt in 0..5 {
            let (a, b) = split(&r, attempt + depth);
            if let (Some(na), Some(nb)) = (winding(&ch, &a), winding(&ch, &b)) {
                stack.push((a, na, depth + 1));
                stack.push((b, nb, depth + 1));
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::ToleranceNotMet(format!("no root-free cut found near {}", r.centre())));
        }
    }
    roots.retain(|z| region.contains(*z, tol));
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(roots
        .into_iter()
        .map(|lambda| {
            let (d, _) = null_vector(&ch.matrix(lambda));
            Eigenpair { lambda, d }
        })
        .collect())
}

/// Boundary residual `‖g(1) − B_C g(0)‖` and the largest ODE residual
/// `|−c_j g_j′(s) + λ g_j(s)|` over 100 sample points per edge.
pub fn eigen_residuals(ts: &TransportSystem, pair: &Eigenpair) -> (f64, f64) {
    let c = ts.speed_values();
    let bc = ts.boundary_matrix().map(|x| C64::new(x, 0.0));
    let g = |s: f64| DVector::from_fn(c.len(), |j, _| (pair.lambda * s / c[j]).exp() * pair.d[j]);
    let boundary = (g(1.0) - bc * g(0.0)).norm();
    let mut ode: f64 = 0.0;
    for j in 0..c.len() {
        for k in 0..100 {
            let s = k as f64 / 99.0;
            let value = (pair.lambda * s / c[j]).exp() * pair.d[j];
            let slope = pair.lambda / c[j] * value;
            ode = ode.max((-slope * c[j] + pair.lambda * value).norm());
        }
    }
    (boundary, ode)
}
