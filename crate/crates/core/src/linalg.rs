//! Dense helpers over `nalgebra::DMatrix` that route the O(n³) products
//! through `matrixmultiply` with explicit strides.

use nalgebra::DMatrix;

/// C ← α·op(A)·op(B) + β·C, column-major storage, no aliasing.
fn dgemm_into(
    alpha: f64,
    a: &DMatrix<f64>,
    trans_a: bool,
    b: &DMatrix<f64>,
    trans_b: bool,
    beta: f64,
    c: &mut DMatrix<f64>,
) {
    let (m, k) = if trans_a {
        (a.ncols(), a.nrows())
    } else {
        (a.nrows(), a.ncols())
    };
    let (kb, n) = if trans_b {
        (b.ncols(), b.nrows())
    } else {
        (b.nrows(), b.ncols())
    };
    assert_eq!(k, kb, "inner dimensions differ");
    assert_eq!((c.nrows(), c.ncols()), (m, n), "output shape mismatch");
    if m == 0 || n == 0 {
        return;
    }
    let lda = a.nrows() as isize;
    let ldb = b.nrows() as isize;
    let ldc = c.nrows() as isize;
    let (rsa, csa) = if trans_a { (lda, 1) } else { (1, lda) };
    let (rsb, csb) = if trans_b { (ldb, 1) } else { (1, ldb) };
    // SAFETY: shapes and strides were checked above; `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            1,
            ldc,
        );
    }
}

pub fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(a.nrows(), b.ncols());
    dgemm_into(1.0, a, false, b, false, 0.0, &mut c);
    c
}

/// Aᵀ·B.
pub fn matmul_tn(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(a.ncols(), b.ncols());
    dgemm_into(1.0, a, true, b, false, 0.0, &mut c);
    c
}

/// A·Bᵀ.
pub fn matmul_nt(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(a.nrows(), b.nrows());
    dgemm_into(1.0, a, false, b, true, 0.0, &mut c);
    c
}

/// C ← C + AᵀA.
pub fn add_gram(c: &mut DMatrix<f64>, a: &DMatrix<f64>) {
    dgemm_into(1.0, a, true, a, false, 1.0, c);
}

/// (A + Aᵀ)/2 in place.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |m, &v| m.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(r: usize, c: usize, seed: f64) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |i, j| ((i * 7 + j * 3) as f64 * 0.37 + seed).sin())
    }

    #[test]
    fn products_match_nalgebra() {
        let a = sample(5, 3, 0.1);
        let b = sample(3, 4, 0.7);
        let d = sample(4, 3, 1.3);
        assert!((matmul(&a, &b) - &a * &b).abs().max() < 1e-14);
        assert!((matmul_tn(&b, &d.transpose()) - b.transpose() * d.transpose()).abs().max() < 1e-14);
        assert!((matmul_nt(&a, &d) - &a * d.transpose()).abs().max() < 1e-14);
        let mut g = DMatrix::identity(3, 3);
        add_gram(&mut g, &a);
        assert!((g - (DMatrix::identity(3, 3) + a.transpose() * &a)).abs().max() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -4.0, 2.0]));
        assert!((spectral_norm(&a) - 4.0).abs() < 1e-14);
    }
}
