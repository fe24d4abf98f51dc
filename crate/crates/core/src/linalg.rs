//! Small dense symmetric-matrix helpers.
//!
//! Every decomposition symmetrizes its input as `(A + Aᵀ) / 2` first so that
//! floating-point drift never leaks into the eigenvectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

pub type Vector<T> = DVector<T>;
pub type Matrix<T> = DMatrix<T>;

const EIGEN_MAX_ITER: usize = 10_000;

pub fn symmetrize<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

/// Largest absolute entry of `m - mᵀ`.
pub fn asymmetry<T: Scalar>(m: &Matrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > worst {
                worst = gap;
            }
        }
    }
    worst
}

/// Symmetric eigendecomposition of the symmetrized input.
pub fn sym_eigen<T: Scalar>(m: &Matrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailed);
    }
    SymmetricEigen::try_new(symmetrize(m), T::default_epsilon(), EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailed)
}

pub fn eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vector<T>> {
    Ok(sym_eigen(m)?.eigenvalues)
}

pub fn min_eigenvalue<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?.min())
}

pub fn max_eigenvalue<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?.max())
}

/// Spectral norm of a symmetric matrix, computed as its largest |eigenvalue|.
pub fn spectral_norm_sym<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?.iter().fold(T::zero(), |acc, e| acc.max(e.abs())))
}

/// `a ⪯ b + tol·I`, decided on the smallest eigenvalue of `b - a`.
pub fn psd_le<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, tol: T) -> Result<bool> {
    Ok(min_eigenvalue(&(b - a))? >= -tol)
}

/// Rebuilds `V f(Λ) Vᵀ` from an eigendecomposition.
pub fn spectral_map<T: Scalar>(
    eig: &SymmetricEigen<T, nalgebra::Dyn>,
    f: impl Fn(T) -> T,
) -> Matrix<T> {
    let mapped = eig.eigenvalues.map(f);
    let v = &eig.eigenvectors;
    symmetrize(&(v * Matrix::from_diagonal(&mapped) * v.transpose()))
}

/// Validates a covariance: square, symmetric within `sym_tol`, positive definite.
/// Returns the symmetrized matrix.
pub fn check_pd<T: Scalar>(m: &Matrix<T>, sym_tol: T) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > sym_tol {
        return Err(Error::NotSymmetric(to_f64(asym)));
    }
    let s = symmetrize(m);
    let lo = min_eigenvalue(&s)?;
    if lo <= T::zero() {
        return Err(Error::NotPositiveDefinite(to_f64(lo)));
    }
    Ok(s)
}

/// Like [`check_pd`] but admits eigenvalues down to `-psd_tol`.
pub fn check_psd<T: Scalar>(m: &Matrix<T>, sym_tol: T, psd_tol: T) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > sym_tol {
        return Err(Error::NotSymmetric(to_f64(asym)));
    }
    let s = symmetrize(m);
    let lo = min_eigenvalue(&s)?;
    if lo < -psd_tol {
        return Err(Error::NotPositiveSemidefinite(to_f64(lo)));
    }
    Ok(s)
}

/// Inverse of a symmetric positive definite matrix via its eigendecomposition.
pub fn inv_pd<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = sym_eigen(m)?;
    let lo = eig.eigenvalues.min();
    if lo <= T::zero() {
        return Err(Error::NotPositiveDefinite(to_f64(lo)));
    }
    Ok(spectral_map(&eig, |x| T::one() / x))
}

/// Symmetric square root of a PSD matrix (negative round-off clamped to 0).
pub fn sqrt_psd<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = sym_eigen(m)?;
    Ok(spectral_map(&eig, |x| x.max(T::zero()).sqrt()))
}

pub fn logdet_pd<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let ev = eigenvalues(m)?;
    let lo = ev.min();
    if lo <= T::zero() {
        return Err(Error::NotPositiveDefinite(to_f64(lo)));
    }
    Ok(ev.iter().fold(T::zero(), |acc, e| acc + e.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn spectral_helpers_on_diagonal() {
        let m: Matrix<f64> = dmatrix![4.0, 0.0; 0.0, 9.0];
        let r = sqrt_psd(&m).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-12 && (r[(1, 1)] - 3.0).abs() < 1e-12);
        let inv = inv_pd(&m).unwrap();
        assert!((inv[(1, 1)] - 1.0 / 9.0).abs() < 1e-12);
        assert!((logdet_pd(&m).unwrap() - 36f64.ln()).abs() < 1e-12);
        assert!((spectral_norm_sym(&dmatrix![-5.0f64, 0.0; 0.0, 1.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn check_pd_rejects_bad_input() {
        let asym: Matrix<f64> = dmatrix![1.0, 0.1; 0.0, 1.0];
        assert!(matches!(check_pd(&asym, 1e-9), Err(Error::NotSymmetric(_))));
        let indef: Matrix<f64> = dmatrix![1.0, 2.0; 2.0, 1.0];
        assert!(matches!(
            check_pd(&indef, 1e-9),
            Err(Error::NotPositiveDefinite(_))
        ));
        let nan: Matrix<f64> = dmatrix![f64::NAN, 0.0; 0.0, 1.0];
        assert!(check_pd(&nan, 1e-9).is_err());
    }

    #[test]
    fn psd_order() {
        let a: Matrix<f64> = dmatrix![1.0, 0.0; 0.0, 1.0];
        let b: Matrix<f64> = dmatrix![2.0, 0.0; 0.0, 1.0];
        assert!(psd_le(&a, &b, 0.0).unwrap());
        assert!(!psd_le(&b, &a, 1e-9).unwrap());
    }
}
