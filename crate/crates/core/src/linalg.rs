//! Dense complex matrix helpers shared by every module.
//!
//! Superoperators use column-stacking vectorization: the element `(r, c)` of
//! an `n × n` operator sits at index `r + n·c`, and
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance for operator identities.
pub const OPERATOR_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Entrywise equality within an absolute tolerance.
pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Column-stacked vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for an `n × n` operator.
pub fn unvectorize(v: &CVector, n: usize) -> CMatrix {
    assert_eq!(v.len(), n * n, "vector length is not n²");
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Index of element `(row, col)` in the vectorized `n × n` operator.
#[inline]
pub fn vec_index(row: usize, col: usize, n: usize) -> usize {
    row + n * col
}

/// Superoperator of `X ↦ A X`.
pub fn left_multiplication(a: &CMatrix) -> CMatrix {
    kron(&identity(a.nrows()), a)
}

/// Superoperator of `X ↦ X B`.
pub fn right_multiplication(b: &CMatrix) -> CMatrix {
    kron(&b.transpose(), &identity(b.nrows()))
}

/// Matrix exponential (Padé scaling and squaring). Rejects non-finite input
/// and output.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Usage("matrix exponential of a non-square matrix".into()));
    }
    if !is_finite(m) {
        return Err(Error::Numerical("non-finite entries in exponent".into()));
    }
    let e = m.exp();
    if !is_finite(&e) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(e)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    // symmetrize to discard rounding-level anti-Hermitian parts
    let h = (m + m.adjoint()) * re(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Eigenvalues and right eigenvectors (columns, unit norm) of a general
/// complex matrix via complex Schur form and triangular back-substitution.
pub fn general_eigen(m: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = m.nrows();
    if !m.is_square() || n == 0 {
        return Err(Error::Usage("eigendecomposition needs a non-empty square matrix".into()));
    }
    if !is_finite(m) {
        return Err(Error::Numerical("non-finite entries in eigenproblem".into()));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or_else(|| {
        Error::Numerical(format!("Schur iteration did not converge for {n}×{n} matrix (max |entry| = {:.3e})", max_abs(m)))
    })?;
    let (q, t) = schur.unpack();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let small = scale * f64::EPSILON;

    let eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = eigenvalues[k];
        let mut y = CVector::zeros(n);
        y[k] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = re(small);
            }
            y[i] = -acc / denom;
        }
        let x = &q * y;
        let norm = x.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical(format!("eigenvector {k} collapsed during back-substitution")));
        }
        vectors.set_column(k, &(x / re(norm)));
    }
    Ok((eigenvalues, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix {
        CMatrix::from_fn(3, 3, |r, c| C64::new((r * 3 + c) as f64 * 0.3 - 1.0, (r as f64 - c as f64) * 0.2))
    }

    #[test]
    fn vectorization_identity_matches_direct_product() {
        let a = sample();
        let b = sample().adjoint() * re(0.7);
        let x = CMatrix::from_fn(3, 3, |r, c| C64::new(r as f64 + 0.1, c as f64 - 0.4));
        let direct = vectorize(&(&a * &x * &b));
        let sup = left_multiplication(&a) * right_multiplication(&b) * vectorize(&x);
        assert!((direct - sup).norm() < 1e-12);
        assert_eq!(unvectorize(&vectorize(&x), 3), x);
        assert_eq!(vectorize(&x)[vec_index(2, 1, 3)], x[(2, 1)]);
    }

    #[test]
    fn general_eigen_residuals() {
        let m = sample();
        let (vals, vecs) = general_eigen(&m).unwrap();
        for (k, &val) in vals.iter().enumerate() {
            let v = vecs.column(k).into_owned();
            let r = &m * &v - &v * val;
            assert!(r.norm() < 1e-12 * max_abs(&m).max(1.0), "residual {}", r.norm());
        }
    }

    #[test]
    fn expm_of_diagonal_is_entrywise() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![re(0.5), C64::new(0.0, 1.0), re(-2.0)]));
        let e = expm(&d).unwrap();
        for k in 0..3 {
            assert!((e[(k, k)] - d[(k, k)].exp()).norm() < 1e-14);
        }
        let mut bad = d.clone();
        bad[(0, 0)] = re(f64::NAN);
        assert!(matches!(expm(&bad), Err(Error::Numerical(_))));
    }

    #[test]
    fn hermitian_eigen_sorted_and_orthonormal() {
        let a = sample();
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(approx_eq(&(vecs.adjoint() * &vecs), &identity(3), 1e-12));
    }
}
