//! Small dense linear-algebra helpers shared by the spectral modules.

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};

use crate::{Error, Result};

pub type C64 = Complex<f64>;

const SCHUR_MAX_ITER: usize = 100_000;

/// Eigenvalues of a real square matrix, complex pairs included.
pub fn eigenvalues_real(m: &DMatrix<f64>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::ToleranceNotMet("real Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a complex square matrix, read off the triangular Schur factor.
pub fn eigenvalues_complex(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)]]),
        _ => {
            let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or_else(|| {
                Error::ToleranceNotMet("complex Schur iteration did not converge".into())
            })?;
            let (_, t) = schur.unpack();
            Ok(t.diagonal().iter().copied().collect())
        }
    }
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Right singular vector of the smallest singular value, normalised to unit length,
/// together with that singular value.
pub fn null_vector(m: &DMatrix<C64>) -> (DVector<C64>, f64) {
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let k = svd.singular_values.len() - 1;
    let v: DVector<C64> = v_t.row(k).adjoint();
    let norm = v.norm();
    (v / C64::new(norm, 0.0), svd.singular_values[k])
}

/// Numerical rank from singular values relative to the largest one.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Distance between two multisets of complex numbers that is robust to the
/// splitting of defective eigenvalues.
///
/// Points of both sets are grouped by single linkage at `radius`; every group
/// must hold the same number of points from each side, and the result is the
/// largest distance between the two per-group centroids. Returns `f64::INFINITY`
/// when the sizes or group counts disagree.
pub fn cluster_multiset_distance(a: &[C64], b: &[C64], radius: f64) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let pts: Vec<(C64, bool)> = a
        .iter()
        .map(|&z| (z, true))
        .chain(b.iter().map(|&z| (z, false)))
        .collect();
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (pts[i].0 - pts[j].0).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (C64, usize, C64, usize)> =
        std::collections::BTreeMap::new();
    for (i, &(z, left)) in pts.iter().enumerate() {
        let r = find(&mut parent, i);
        let g = groups.entry(r).or_insert((C64::new(0.0, 0.0), 0, C64::new(0.0, 0.0), 0));
        if left {
            g.0 += z;
            g.1 += 1;
        } else {
            g.2 += z;
            g.3 += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (sa, na, sb, nb) in groups.values() {
        if na != nb {
            return f64::INFINITY;
        }
        let ca = sa / *na as f64;
        let cb = sb / *nb as f64;
        worst = worst.max((ca - cb).norm());
    }
    worst
}

/// Symmetric positive definite band matrix with Cholesky factorisation in place.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    // lower band, row-major: data[i * (bw + 1) + (bw - (i - j))] holds (i, j) for i - bw <= j <= i
    data: Vec<f64>,
    factored: bool,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)], factored: false }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    /// Adds `v` at (i, j); only the lower triangle is stored, so (i, j) and (j, i) alias.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        assert!(r - c <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.idx(r, c)]
        }
    }

    /// y = A x, valid only before factorisation.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    pub fn factor(&mut self) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut d = self.data[self.idx(j, j)];
            for k in lo..j {
                let l = self.data[self.idx(j, k)];
                d -= l * l;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::SingularAssembly(format!("non-positive pivot at row {j}")));
            }
            let d = d.sqrt();
            let jj = self.idx(j, j);
            self.data[jj] = d;
            let hi = (j + bw).min(n - 1);
            for i in (j + 1)..=hi {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = self.data[self.idx(i, j)];
                for k in lo_i..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                let ij = self.idx(i, j);
                self.data[ij] = s / d;
            }
        }
        self.factored = true;
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert!(self.factored, "factor() first");
        let (n, bw) = (self.n, self.bw);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.data[self.idx(i, k)] * y[k];
            }
            y[i] = s / self.data[self.idx(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = y[i];
            for k in (i + 1)..=hi {
                s -= self.data[self.idx(k, i)] * y[k];
            }
            y[i] = s / self.data[self.idx(i, i)];
        }
        y
    }
}
