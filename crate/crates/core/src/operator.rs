//! Singular values, trace norms and the Lidskii identity for matrices acting
//! on Rⁿ with an inner product ⟨u, v⟩ = uᵀGv.
//!
//! With G = LLᵀ, the map x ↦ Lᵀx is an isometry onto the Euclidean space, so
//! every ip-dependent quantity of A is computed from LᵀAL⁻ᵀ.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::{symmetric_eigen, CholeskyFactor, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::matmul;

#[derive(Debug, Clone)]
pub struct InnerProduct {
    gram: DMatrix<f64>,
    chol: CholeskyFactor,
}

impl InnerProduct {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::Domain("gram matrix must be square".into()));
        }
        let chol = CholeskyFactor::new(&gram)?;
        Ok(Self { gram, chol })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is positive definite")
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// LᵀAL⁻ᵀ: the matrix of A in a G-orthonormal frame.
    pub fn to_orthonormal(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::Domain(format!(
                "operator is {}x{}, inner product has dimension {}",
                a.nrows(),
                a.ncols(),
                self.dim()
            )));
        }
        Ok(self.chol.to_orthonormal(a))
    }

    pub fn operator_norm(&self, a: &DMatrix<f64>) -> Result<f64> {
        Ok(singular_values(a, self)?.first().copied().unwrap_or(0.0))
    }
}

/// Singular values of A with the adjoint taken in `ip`, descending.
pub fn singular_values(a: &DMatrix<f64>, ip: &InnerProduct) -> Result<Vec<f64>> {
    let b = ip.to_orthonormal(a)?;
    let mut s: Vec<f64> = b.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// ‖A‖₁ = Σ singular values.
pub fn trace_norm(a: &DMatrix<f64>, ip: &InnerProduct) -> Result<f64> {
    let mut s = singular_values(a, ip)?;
    s.reverse();
    Ok(s.iter().sum())
}

/// |Tr A − Σ eigenvalues(A)|, eigenvalues from a real Schur form.
pub fn lidskii_residual(a: &DMatrix<f64>, ip: &InnerProduct) -> Result<f64> {
    let b = ip.to_orthonormal(a)?;
    let trace = a.trace();
    let eig_sum: f64 = b.schur().complex_eigenvalues().iter().map(|z| z.re).sum();
    Ok((trace - eig_sum).abs())
}

/// Extremal generalized eigenvalues κ of (gram2, gram1).
pub fn relative_spectrum(ip1: &InnerProduct, ip2: &InnerProduct) -> Result<(f64, f64)> {
    let c = ip1.to_orthonormal_gram(ip2)?;
    let (vals, _) = symmetric_eigen(&c, false)?;
    Ok((vals[0], *vals.last().unwrap()))
}

impl InnerProduct {
    /// L₁⁻¹G₂L₁⁻ᵀ, similar to G₁⁻¹G₂.
    fn to_orthonormal_gram(&self, other: &InnerProduct) -> Result<DMatrix<f64>> {
        if other.dim() != self.dim() {
            return Err(Error::Domain("inner products have different dimensions".into()));
        }
        let li = self.chol.l_inv();
        let mut c = matmul(&matmul(li, &other.gram), &li.transpose());
        crate::linalg::symmetrize(&mut c);
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceBounds {
    /// ‖A‖₁ in ip2 over ‖A‖₁ in ip1.
    pub ratio: f64,
    /// ε = max(√κ_max − 1, 1 − √κ_min).
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
}

impl EquivalenceBounds {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.ratio.max(1.0);
        self.lower - slack <= self.ratio && self.ratio <= self.upper + slack
    }
}

/// Compares trace norms of A in two uniformly equivalent inner products.
///
/// For ε < 1 the bounds are (1−ε)/(1+ε) and (1+ε)/(1−ε); otherwise the
/// sharper √(κ_min/κ_max), √(κ_max/κ_min) are used.
pub fn equivalence_bounds(a: &DMatrix<f64>, ip1: &InnerProduct, ip2: &InnerProduct) -> Result<EquivalenceBounds> {
    let (kmin, kmax) = relative_spectrum(ip1, ip2)?;
    if kmin <= 0.0 {
        return Err(Error::Domain("inner products are not equivalent".into()));
    }
    let n1 = trace_norm(a, ip1)?;
    let n2 = trace_norm(a, ip2)?;
    let ratio = if n1 == 0.0 { 1.0 } else { n2 / n1 };
    let epsilon = f64::max(kmax.sqrt() - 1.0, 1.0 - kmin.sqrt()).max(0.0);
    let (lower, upper) = if epsilon < 1.0 {
        ((1.0 - epsilon) / (1.0 + epsilon), (1.0 + epsilon) / (1.0 - epsilon))
    } else {
        let r = (kmax / kmin).sqrt();
        (1.0 / r, r)
    };
    Ok(EquivalenceBounds {
        ratio,
        epsilon,
        lower,
        upper,
    })
}

/// P = I − Σ_kernel v vᵀM, the M-orthogonal projector off the kernel.
pub fn kernel_projector(spectrum: &Spectrum, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let v = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Spectrum("eigenvectors were not computed".into()))?;
    let k = spectrum.kernel_dim;
    let vk = v.columns(0, k).into_owned();
    let n = v.nrows();
    Ok(DMatrix::identity(n, n) - matmul(&vk, &(vk.transpose() * m)))
}

/// ‖P·e^{−tΔ}‖₁ in the M inner product, which equals θ(t).
pub fn heat_trace_norm(spectrum: &Spectrum, m: &DMatrix<f64>, t: f64) -> Result<f64> {
    let e = crate::heat::heat_operator(spectrum, m, t)?;
    let p = kernel_projector(spectrum, m)?;
    trace_norm(&matmul(&p, &e), &InnerProduct::new(m.clone())?)
}

/// min over n ≥ start of a sequence: the finite stand-in for lim inf.
pub fn tail_infimum(seq: &[f64], start: usize) -> f64 {
    seq.iter().skip(start).copied().fold(f64::INFINITY, f64::min)
}

/// For a nonnegative array a[n][k], returns (Σ_k liminf_n a, liminf_n Σ_k a)
/// with lim inf replaced by the infimum over n ≥ start. Fatou's lemma for
/// sums says the first never exceeds the second.
pub fn fatou_sums(array: &[Vec<f64>], start: usize) -> Result<(f64, f64)> {
    let width = array.first().map_or(0, Vec::len);
    if array.iter().any(|row| row.len() != width) {
        return Err(Error::Domain("rows of the array have different lengths".into()));
    }
    if array.iter().flatten().any(|&v| v.is_nan() || v < 0.0) {
        return Err(Error::Domain("entries must be nonnegative".into()));
    }
    if start >= array.len() {
        return Err(Error::Domain("tail start beyond the array".into()));
    }
    let sum_of_inf = (0..width)
        .map(|k| tail_infimum(&array.iter().map(|r| r[k]).collect::<Vec<_>>(), start))
        .sum();
    let sums: Vec<f64> = array.iter().map(|r| r.iter().sum()).collect();
    Ok((sum_of_inf, tail_infimum(&sums, start)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn diagonal_cases() {
        let id = InnerProduct::identity(3);
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(singular_values(&a, &id).unwrap(), vec![3.0, 2.0, 1.0]);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0]));
        let id2 = InnerProduct::identity(2);
        assert!((trace_norm(&b, &id2).unwrap() - 3.0).abs() < 1e-15);
        assert!(lidskii_residual(&b, &id2).unwrap() < 1e-15);
    }

    #[test]
    fn unitary_in_weighted_ip() {
        // A rotation in the G-orthonormal frame: U = L⁻ᵀRLᵀ.
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let ip = InnerProduct::new(g).unwrap();
        let c = 0.3f64.cos();
        let s = 0.3f64.sin();
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let l = ip.chol.l().clone();
        let u = l.transpose().try_inverse().unwrap() * r * l.transpose();
        for v in singular_values(&u, &ip).unwrap() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn equal_and_scaled_inner_products() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 0.3]);
        let ip = InnerProduct::new(g.clone()).unwrap();
        let e = equivalence_bounds(&a, &ip, &ip).unwrap();
        assert!((e.ratio - 1.0).abs() < 1e-14 && e.epsilon < 1e-14 && e.holds());
        let scaled = InnerProduct::new(g * 7.0).unwrap();
        let e = equivalence_bounds(&a, &ip, &scaled).unwrap();
        assert!((e.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fatou_on_alternating_array() {
        // a[n] = e_{n mod 2}: each column has lim inf 0, every row sums to 1.
        let arr: Vec<Vec<f64>> = (0..10)
            .map(|n| if n % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect();
        let (a, b) = fatou_sums(&arr, 2).unwrap();
        assert_eq!((a, b), (0.0, 1.0));
        assert!(fatou_sums(&[vec![-1.0]], 0).is_err());
    }
}
