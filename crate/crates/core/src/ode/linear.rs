use nalgebra::{DMatrix, DVector};

use crate::linalg::{eigenvalues_complex, eigenvalues_real, rank, to_complex, C64};
use crate::{Error, Result};

/// Linearisation of an agent network at the synchronous origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedNetwork {
    /// J_F(0), p×p.
    pub b: DMatrix<f64>,
    /// K(0)·J_H(0)·J_Q(0), p×p.
    pub d: DMatrix<f64>,
    /// In-degree Laplacian L⁺, n×n.
    pub laplacian: DMatrix<f64>,
}

impl LinearizedNetwork {
    fn check(&self) -> Result<()> {
        let p = self.b.nrows();
        if !self.b.is_square() || self.d.shape() != (p, p) || !self.laplacian.is_square() || p == 0 {
            return Err(Error::DimMismatch(format!(
                "B {:?}, D {:?}, L {:?}",
                self.b.shape(),
                self.d.shape(),
                self.laplacian.shape()
            )));
        }
        Ok(())
    }

    /// `J = Iₙ ⊗ B − L⁺ ⊗ D`.
    pub fn jacobian(&self) -> Result<DMatrix<f64>> {
        self.check()?;
        let n = self.laplacian.nrows();
        Ok(DMatrix::<f64>::identity(n, n).kronecker(&self.b) - self.laplacian.kronecker(&self.d))
    }

    /// `⋃_{λ ∈ σ(L⁺)} σ(B − λD)`, ordered by Laplacian eigenvalue.
    pub fn spectrum_union(&self) -> Result<Vec<C64>> {
        self.check()?;
        let b = to_complex(&self.b);
        let d = to_complex(&self.d);
        let mut out = Vec::with_capacity(self.laplacian.nrows() * self.b.nrows());
        for lambda in eigenvalues_real(&self.laplacian)? {
            out.extend(eigenvalues_complex(&(&b - &d * lambda))?);
        }
        Ok(out)
    }
}

/// Candidate Laplacian eigenvalues obtained from Jacobian eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    /// Finite generalised eigenvalues of `(B − μI, D)`, one list per μ.
    /// Empty for μ ∈ σ(B) in the rank-one case.
    pub candidates: Vec<Vec<C64>>,
    /// Whether the rank-one closed form was used.
    pub rank_one: bool,
    /// Multiset of size n selected by the consistency matcher, when it
    /// succeeds; `n = mu_list.len() / p`.
    pub spectrum: Option<Vec<C64>>,
    /// Why matching failed, if it did.
    pub failure: Option<String>,
}

const SHIFTS: [(f64, f64); 6] = [(0.0, 0.0), (1.3717, 0.0), (-2.1131, 0.0), (0.4123, 0.7781), (-0.913, -1.517), (3.77, 2.09)];

/// Laplacian eigenvalues from Jacobian eigenvalues by the pencil
/// `(B − μI)v = λDv`.
pub fn recover_laplacian_spectrum(mu_list: &[C64], b: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<Recovery> {
    let p = b.nrows();
    if !b.is_square() || d.shape() != (p, p) || p == 0 {
        return Err(Error::DimMismatch(format!("B {:?}, D {:?}", b.shape(), d.shape())));
    }
    let scale = 1.0 + b.amax().max(d.amax());
    let rank_d = rank(d, 1e-10);
    let rank_one = rank_d == 1 && rank_one_factors(b, d).is_some();
    let mut candidates = Vec::with_capacity(mu_list.len());
    if rank_one {
        let (v, w) = rank_one_factors(b, d).expect("checked above");
        let sigma_b = eigenvalues_real(b)?;
        for &mu in mu_list {
            let resonant = sigma_b.iter().any(|s| (s - mu).norm() <= 1e-7 * scale);
            if resonant {
                candidates.push(Vec::new());
                continue;
            }
            let shifted = to_complex(b) - DMatrix::<C64>::identity(p, p) * mu;
            let x = shifted
                .lu()
                .solve(&v)
                .ok_or_else(|| Error::SingularPencil(format!("{mu}")))?;
            let denom = w.dot(&x);
            if denom.norm() == 0.0 {
                return Err(Error::SingularPencil(format!("{mu}")));
            }
            candidates.push(vec![C64::new(1.0, 0.0) / denom]);
        }
    } else {
        for &mu in mu_list {
            candidates.push(pencil_eigenvalues(b, d, mu, rank_d, scale)?);
        }
    }
    let (spectrum, failure) = match consistency_match(&candidates, p, rank_one, scale) {
        Ok(s) => (Some(s), None),
        Err(msg) => (None, Some(msg)),
    };
    Ok(Recovery { candidates, rank_one, spectrum, failure })
}

/// `D = v wᵀ` with both Krylov matrices `[v, Bv, …]` and `[w, Bᵀw, …]` of
/// full rank p.
fn rank_one_factors(b: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<(DVector<C64>, DVector<C64>)> {
    let p = b.nrows();
    let svd = d.clone().svd(true, true);
    let (u, vt) = (svd.u?, svd.v_t?);
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let v: DVector<f64> = u.column(k) * s;
    let w: DVector<f64> = vt.row(k).transpose();
    let krylov = |m: &DMatrix<f64>, x: &DVector<f64>| {
        let mut k = DMatrix::zeros(p, p);
        let mut col = x.clone();
        for j in 0..p {
            k.set_column(j, &col);
            col = m * col;
        }
        rank(&k, 1e-10) == p
    };
    if krylov(b, &v) && krylov(&b.transpose(), &w) {
        Some((v.map(|x| C64::new(x, 0.0)), w.map(|x| C64::new(x, 0.0))))
    } else {
        None
    }
}

/// Finite eigenvalues of `(B − μI)v = λDv` through the shifted inverse
/// `(B − μI − sD)⁻¹D`, whose nonzero eigenvalues are `1/(λ − s)`.
fn pencil_eigenvalues(b: &DMatrix<f64>, d: &DMatrix<f64>, mu: C64, rank_d: usize, scale: f64) -> Result<Vec<C64>> {
    let p = b.nrows();
    if rank_d == 0 {
        return Err(Error::SingularPencil(format!("{mu}")));
    }
    let bc = to_complex(b) - DMatrix::<C64>::identity(p, p) * mu;
    let dc = to_complex(d);
    for &(re, im) in &SHIFTS {
        let s = C64::new(re, im);
        let a = &bc - &dc * s;
        let sv = a.clone().svd(false, false).singular_values;
        let (lo, hi) = (sv.min(), sv.max());
        if hi == 0.0 || lo < 1e-8 * hi {
            continue;
        }
        let Some(inv) = a.try_inverse() else { continue };
        let mut theta = eigenvalues_complex(&(inv * &dc))?;
        theta.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        let top = theta.first().map_or(0.0, |t| t.norm());
        let out: Vec<C64> = theta
            .into_iter()
            .take(rank_d)
            .filter(|t| t.norm() > 1e-10 * top.max(1.0 / scale))
            .map(|t| s + C64::new(1.0, 0.0) / t)
            .collect();
        if out.is_empty() {
            return Err(Error::SingularPencil(format!("{mu}")));
        }
        return Ok(out);
    }
    Err(Error::SingularPencil(format!("{mu}")))
}

/// Selects n Laplacian eigenvalues. Every true eigenvalue λ is produced by
/// the p values of μ in σ(B − λD), so candidate clusters supported by at
/// least p distinct μ are kept with multiplicity `support / p`.
fn consistency_match(candidates: &[Vec<C64>], p: usize, rank_one: bool, scale: f64) -> std::result::Result<Vec<C64>, String> {
    if !candidates.len().is_multiple_of(p) {
        return Err(format!("{} eigenvalues is not a multiple of p = {p}", candidates.len()));
    }
    let n = candidates.len() / p;
    let radius = 1e-5 * scale;
    let mut points: Vec<(usize, C64)> = Vec::new();
    for (k, list) in candidates.iter().enumerate() {
        points.extend(list.iter().map(|&c| (k, c)));
    }
    // single-linkage clusters
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if (points[i].1 - points[j].1).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    struct Cluster {
        centre: C64,
        support: usize,
    }
    let mut kept: Vec<Cluster> = clusters
        .values()
        .map(|members| {
            let mut mus: Vec<usize> = members.iter().map(|&i| points[i].0).collect();
            mus.sort_unstable();
            mus.dedup();
            let centre = members.iter().map(|&i| points[i].1).sum::<C64>() / members.len() as f64;
            Cluster { centre, support: mus.len() }
        })
        .filter(|c| c.support >= p)
        .collect();
    kept.sort_by(|a, b| b.support.cmp(&a.support).then(a.centre.re.total_cmp(&b.centre.re)));
    let mut spectrum: Vec<C64> = Vec::with_capacity(n);
    if rank_one {
        // resonant μ carry the zero eigenvalue
        let resonant = candidates.iter().filter(|c| c.is_empty()).count();
        let zeros = (resonant / p).max(1);
        spectrum.extend(std::iter::repeat_n(C64::new(0.0, 0.0), zeros));
    }
    for c in &kept {
        let copies = c.support / p;
        for _ in 0..copies {
            if spectrum.len() < n {
                spectrum.push(c.centre);
            }
        }
    }
    if !spectrum.iter().any(|z| z.norm() <= radius) {
        return Err("no consistent cluster at 0".into());
    }
    if spectrum.len() < n {
        return Err(format!("only {} of {n} eigenvalues are supported by {p} values of mu", spectrum.len()));
    }
    spectrum.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(spectrum)
}
