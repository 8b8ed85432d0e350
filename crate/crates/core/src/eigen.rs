//! Dense generalised symmetric eigensolver for the pencil (K, M).
//!
//! M = LLᵀ, C = L⁻¹KL⁻ᵀ, Householder tridiagonalisation of C, implicit QL
//! on the tridiagonal, back-transformation v = L⁻ᵀy. Work arrays are
//! row-major and eigenvectors are kept as rows of Qᵀ so that every inner
//! loop walks contiguous memory.

use nalgebra::{DMatrix, DVector};

use crate::basis::OperatorPair;
use crate::error::{Error, Result};
use crate::linalg::{matmul, matmul_nt, matmul_tn, spectral_norm};

pub const SOLVER_VERSION: &str = "householder-ql-2";

const QL_MAX_SWEEPS: usize = 30;
const QL_TOL: f64 = 1e-14;
const KERNEL_RTOL: f64 = 1e-8;

/// Row-major square matrix.
struct Square {
    n: usize,
    a: Vec<f64>,
}

impl Square {
    fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        // DMatrix is column-major; its storage read as row-major is the
        // transpose, which is harmless for the symmetric inputs used here.
        Self {
            n,
            a: m.as_slice().to_vec(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.a[i * self.n..(i + 1) * self.n]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    /// Two distinct rows, mutably.
    fn rows2(&mut self, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
        assert!(i < j);
        let n = self.n;
        let (lo, hi) = self.a.split_at_mut(j * n);
        (&mut lo[i * n..(i + 1) * n], &mut hi[..n])
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix and its
/// inverse.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: DMatrix<f64>,
    l_inv: DMatrix<f64>,
}

impl CholeskyFactor {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let mut a = Square::from_dmatrix(m);
        for j in 0..n {
            for i in j..n {
                let (ri, rj) = if i == j {
                    let r = a.row(i);
                    (r, r)
                } else {
                    (a.row(i), a.row(j))
                };
                let dot: f64 = ri[..j].iter().zip(&rj[..j]).map(|(x, y)| x * y).sum();
                let v = a.at(i, j) - dot;
                if i == j {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::IndefiniteMass { pivot: j, value: v });
                    }
                    a.set(j, j, v.sqrt());
                } else {
                    a.set(i, j, v / a.at(j, j));
                }
            }
        }
        // L⁻¹ row by row: row i = (e_i − Σ_{k<i} L_ik·row k)/L_ii.
        let mut inv = Square {
            n,
            a: vec![0.0; n * n],
        };
        let mut acc = vec![0.0; n];
        for i in 0..n {
            acc[..=i].iter_mut().for_each(|v| *v = 0.0);
            acc[i] = 1.0;
            let li = a.row(i);
            for k in 0..i {
                let f = li[k];
                if f != 0.0 {
                    for (x, y) in acc[..=k].iter_mut().zip(&inv.row(k)[..=k]) {
                        *x -= f * y;
                    }
                }
            }
            let lii = li[i];
            for (dst, v) in inv.row_mut(i)[..=i].iter_mut().zip(&acc[..=i]) {
                *dst = v / lii;
            }
        }
        let l = DMatrix::from_fn(n, n, |i, j| if j <= i { a.at(i, j) } else { 0.0 });
        let l_inv = DMatrix::from_fn(n, n, |i, j| if j <= i { inv.at(i, j) } else { 0.0 });
        Ok(Self { l, l_inv })
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn l_inv(&self) -> &DMatrix<f64> {
        &self.l_inv
    }

    /// Lᵀ·A·L⁻ᵀ: the matrix of A in an M-orthonormal frame.
    pub fn to_orthonormal(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        matmul_nt(&matmul_tn(&self.l, a), &self.l_inv)
    }

    /// Operator norm of A: ℝⁿ → ℝⁿ for the norm ‖v‖_M = √(vᵀMv).
    pub fn operator_norm(&self, a: &DMatrix<f64>) -> f64 {
        spectral_norm(&self.to_orthonormal(a))
    }

    /// √(vᵀMv).
    pub fn vector_norm(&self, v: &DVector<f64>) -> f64 {
        (self.l.transpose() * v).norm()
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns (diagonal, subdiagonal with e[0] = 0, Qᵀ if requested) where the
/// input equals Q·T·Qᵀ.
fn tridiagonalize(c: &DMatrix<f64>, want_vectors: bool) -> (Vec<f64>, Vec<f64>, Option<Square>) {
    let n = c.nrows();
    // w[j][k] holds V[k][j] of the classical column-oriented formulation.
    let mut w = Square::from_dmatrix(c);
    let mut d: Vec<f64> = (0..n).map(|j| w.at(j, n - 1)).collect();
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|v| v.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w.at(j, i - 1);
                w.set(j, i, 0.0);
                w.set(i, j, 0.0);
            }
        } else {
            for v in &mut d[..i] {
                *v /= scale;
                h += *v * *v;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|v| *v = 0.0);
            for j in 0..i {
                let f = d[j];
                w.set(i, j, f);
                let row = w.row(j);
                let mut g = e[j] + row[j] * f;
                for k in (j + 1)..i {
                    g += row[k] * d[k];
                    e[k] += row[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                let row = w.row_mut(j);
                for k in j..i {
                    row[k] -= f * e[k] + g * d[k];
                }
                d[j] = row[i - 1];
                row[i] = 0.0;
            }
        }
        d[i] = h;
    }
    if !want_vectors {
        let diag = (0..n).map(|i| w.at(i, i)).collect();
        return (diag, e, None);
    }
    for i in 0..n.saturating_sub(1) {
        let wii = w.at(i, i);
        w.set(i, n - 1, wii);
        w.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            let (rows_lo, row_next) = w.a.split_at_mut((i + 1) * n);
            let next = &row_next[..n];
            for k in 0..=i {
                d[k] = next[k] / h;
            }
            for j in 0..=i {
                let rj = &mut rows_lo[j * n..(j + 1) * n];
                let g: f64 = next[..=i].iter().zip(&rj[..=i]).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    rj[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            w.set(i + 1, k, 0.0);
        }
    }
    for j in 0..n {
        d[j] = w.at(j, n - 1);
        w.set(j, n - 1, 0.0);
    }
    w.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
    (d, e, Some(w))
}

/// Implicit QL on a symmetric tridiagonal matrix; rotations are applied to
/// the rows of `zt` when present. Eigenvalues are returned ascending.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Square>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= QL_TOL * dd || e[m].abs() <= tiny {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::Convergence {
                    index: l,
                    iterations: QL_MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (zi, zi1) = z.rows2(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // Selection sort keeps the vector swaps to at most n − 1.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in (i + 1)..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(z) = zt.as_deref_mut() {
                let (a, b) = z.rows2(i, k);
                a.swap_with_slice(b);
            }
        }
    }
    Ok(())
}

/// Eigenvalues (and optionally eigenvectors as columns of Q) of a real
/// symmetric matrix.
pub fn symmetric_eigen(c: &DMatrix<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    let n = c.nrows();
    if n == 0 {
        return Ok((vec![], want_vectors.then(|| DMatrix::zeros(0, 0))));
    }
    let (mut d, mut e, mut zt) = tridiagonalize(c, want_vectors);
    tridiagonal_ql(&mut d, &mut e, zt.as_mut())?;
    // zt is row-major Qᵀ; its storage read column-major is Q.
    let q = zt.map(|z| DMatrix::from_vec(n, n, z.a));
    Ok((d, q))
}

/// Discrete spectrum of a pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are M-orthonormal eigenvectors.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub kernel_dim: usize,
    pub metric_id: String,
    pub basis_l: usize,
    /// Leading Weyl coefficient: #{λ ≤ Λ} ~ vol·Λ, equal to M₀₀.
    pub weyl_coefficient: f64,
}

impl Spectrum {
    /// A spectrum given directly by its eigenvalues; the kernel is detected
    /// with the same rule as for solved pencils.
    pub fn from_eigenvalues(
        mut eigenvalues: Vec<f64>,
        metric_id: impl Into<String>,
        weyl_coefficient: f64,
    ) -> Result<Self> {
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Spectrum("eigenvalues must be finite".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let kernel_dim = kernel_dimension(&eigenvalues);
        Ok(Self {
            eigenvalues,
            eigenvectors: None,
            kernel_dim,
            metric_id: metric_id.into(),
            basis_l: 0,
            weyl_coefficient,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues with the kernel removed.
    pub fn nonzero(&self) -> &[f64] {
        &self.eigenvalues[self.kernel_dim..]
    }

    /// First nonzero eigenvalue.
    pub fn lambda1(&self) -> Result<f64> {
        match self.nonzero().first() {
            Some(&v) if v > 0.0 => Ok(v),
            Some(&v) => Err(Error::Spectrum(format!("first nonzero eigenvalue {v} is not positive"))),
            None => Err(Error::Spectrum("spectrum has no nonzero eigenvalues".into())),
        }
    }

    /// Index of the largest eigenvalue treated as continuum-accurate: the
    /// lower half of the discrete spectrum.
    pub fn accurate_index(&self) -> usize {
        let n = self.len();
        n.div_ceil(2).min(n.saturating_sub(1))
    }

    pub fn accurate_cutoff(&self) -> f64 {
        self.eigenvalues[self.accurate_index()]
    }

    fn vectors(&self) -> Result<&DMatrix<f64>> {
        self.eigenvectors
            .as_ref()
            .ok_or_else(|| Error::Spectrum("eigenvectors were not computed".into()))
    }

    /// V·diag(f(λ_k))·VᵀM in basis coordinates.
    pub fn spectral_function<F: Fn(f64) -> f64>(&self, m: &DMatrix<f64>, f: F) -> Result<DMatrix<f64>> {
        let v = self.vectors()?;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[k]);
        }
        Ok(matmul(&matmul_nt(&scaled, v), m))
    }

    /// (I + M⁻¹K)⁻¹.
    pub fn resolvent(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.spectral_function(m, |l| 1.0 / (1.0 + l))
    }
}

fn kernel_dimension(sorted: &[f64]) -> usize {
    let top = sorted.last().map_or(0.0, |v| v.abs());
    let Some(&first) = sorted.iter().find(|v| v.abs() > 1e-6 * top) else {
        return 0;
    };
    sorted.iter().take_while(|v| v.abs() <= KERNEL_RTOL * first.abs()).count()
}

fn solve(pair: &OperatorPair, want_vectors: bool) -> Result<Spectrum> {
    let chol = CholeskyFactor::new(&pair.m)?;
    let mut c = matmul_nt(&matmul(&chol.l_inv, &pair.k), &chol.l_inv);
    crate::linalg::symmetrize(&mut c);
    let (eigenvalues, q) = symmetric_eigen(&c, want_vectors)?;
    let eigenvectors = match q {
        Some(q) => {
            let mut v = matmul_tn(&chol.l_inv, &q);
            reorthonormalize_clusters(&mut v, &pair.m, &eigenvalues);
            Some(v)
        }
        None => None,
    };
    let kernel_dim = kernel_dimension(&eigenvalues);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        kernel_dim,
        metric_id: pair.metric_id.clone(),
        basis_l: (pair.dim() as f64).sqrt().round() as usize - 1,
        weyl_coefficient: pair.volume(),
    })
}

/// Modified Gram–Schmidt in the M inner product inside each cluster of
/// numerically equal eigenvalues.
fn reorthonormalize_clusters(v: &mut DMatrix<f64>, m: &DMatrix<f64>, vals: &[f64]) {
    let n = vals.len();
    let scale = vals.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end] - vals[end - 1]).abs() <= 1e-9 * scale {
            end += 1;
        }
        let size = end - start;
        let mut block = v.columns(start, size).clone_owned();
        // M·block is updated alongside block, so M is applied once.
        let mut mblock = matmul(m, &block);
        for j in 0..size {
            for i in 0..j {
                let proj = mblock.column(i).dot(&block.column(j));
                let (bi, mi) = (block.column(i).clone_owned(), mblock.column(i).clone_owned());
                block.column_mut(j).axpy(-proj, &bi, 1.0);
                mblock.column_mut(j).axpy(-proj, &mi, 1.0);
            }
            let norm = mblock.column(j).dot(&block.column(j)).sqrt();
            block.column_mut(j).scale_mut(1.0 / norm);
            mblock.column_mut(j).scale_mut(1.0 / norm);
        }
        v.columns_mut(start, size).copy_from(&block);
        start = end;
    }
}

/// Full spectrum with M-orthonormal eigenvectors.
pub fn generalized_eigs(pair: &OperatorPair) -> Result<Spectrum> {
    solve(pair, true)
}

/// Eigenvalues only; roughly three times cheaper than [`generalized_eigs`].
pub fn generalized_eigenvalues(pair: &OperatorPair) -> Result<Spectrum> {
    solve(pair, false)
}

/// (I + Δ)⁻¹ for the pencil, in basis coordinates.
pub fn resolvent(pair: &OperatorPair) -> Result<DMatrix<f64>> {
    generalized_eigs(pair)?.resolvent(&pair.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(n, n, |_, _| next());
        &a * a.transpose() + DMatrix::identity(n, n) * (n as f64 * 0.1)
    }

    #[test]
    fn diagonal_pencil() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0]));
        let pair = OperatorPair::new(Arc::new(k), DMatrix::identity(3, 3), "t").unwrap();
        let s = generalized_eigs(&pair).unwrap();
        for (a, b) in s.eigenvalues.iter().zip([0.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(s.kernel_dim, 1);
        let scaled = generalized_eigenvalues(&pair.scaled(4.0)).unwrap();
        for (a, b) in scaled.eigenvalues.iter().zip([0.0, 0.25, 0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_eigen_matches_nalgebra() {
        for n in [1, 2, 5, 40] {
            let a = random_spd(n, n as u64) - DMatrix::identity(n, n) * 3.0;
            let (vals, q) = symmetric_eigen(&a, true).unwrap();
            let q = q.unwrap();
            let mut reference: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in vals.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-11, "{x} vs {y}");
            }
            let recon = &q * DMatrix::from_diagonal(&DVector::from_vec(vals.clone())) * q.transpose();
            assert!((recon - &a).abs().max() < 1e-11);
            assert!((q.transpose() * &q - DMatrix::identity(n, n)).abs().max() < 1e-12);
            let (vals_only, none) = symmetric_eigen(&a, false).unwrap();
            assert!(none.is_none());
            for (x, y) in vals.iter().zip(&vals_only) {
                assert!((x - y).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn generalized_residual_and_orthonormality() {
        let n = 30;
        let m = random_spd(n, 7);
        let mut k = random_spd(n, 9);
        // Make K singular with kernel e₀.
        for i in 0..n {
            k[(0, i)] = 0.0;
            k[(i, 0)] = 0.0;
        }
        let pair = OperatorPair::new(Arc::new(k.clone()), m.clone(), "rand").unwrap();
        let s = generalized_eigs(&pair).unwrap();
        let v = s.eigenvectors.as_ref().unwrap();
        let gram = v.transpose() * &m * v;
        assert!((gram - DMatrix::identity(n, n)).abs().max() < 1e-10);
        let kn = spectral_norm(&k);
        let mn = spectral_norm(&m);
        for j in 0..n {
            let r = &k * v.column(j) - &m * v.column(j) * s.eigenvalues[j];
            assert!(r.norm() <= 1e-9 * (kn + s.eigenvalues[j] * mn));
        }
        assert_eq!(s.kernel_dim, 1);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn cholesky_reports_pivot() {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = -1.0;
        match CholeskyFactor::new(&m) {
            Err(Error::IndefiniteMass { pivot, .. }) => assert_eq!(pivot, 2),
            other => panic!("unexpected {other:?}"),
        }
        let a = random_spd(6, 3);
        let c = CholeskyFactor::new(&a).unwrap();
        assert!((c.l() * c.l().transpose() - &a).abs().max() < 1e-12);
        assert!((c.l() * c.l_inv() - DMatrix::identity(6, 6)).abs().max() < 1e-12);
    }

    #[test]
    fn resolvent_properties() {
        let n = 12;
        let m = random_spd(n, 21);
        let mut k = random_spd(n, 22);
        for i in 0..n {
            k[(0, i)] = 0.0;
            k[(i, 0)] = 0.0;
        }
        let pair = OperatorPair::new(Arc::new(k.clone()), m.clone(), "r").unwrap();
        let r = resolvent(&pair).unwrap();
        let chol = CholeskyFactor::new(&m).unwrap();
        assert!((chol.operator_norm(&r) - 1.0).abs() < 1e-10);
        let minv_k = m.clone().lu().solve(&k).unwrap();
        let id = DMatrix::identity(n, n);
        assert!(((&id + minv_k) * &r - &id).abs().max() < 1e-9);
        let mut e0 = DVector::zeros(n);
        e0[0] = 1.0;
        assert!((&r * &e0 - &e0).norm() < 1e-10);
    }

    #[test]
    fn synthetic_spectrum_kernel() {
        let s = Spectrum::from_eigenvalues(vec![2.0, 0.0, 1.0], "syn", 1.0).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 2.0]);
        assert_eq!(s.kernel_dim, 1);
        assert_eq!(s.nonzero(), &[1.0, 2.0]);
        assert_eq!(s.lambda1().unwrap(), 1.0);
    }
}
