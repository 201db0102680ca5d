//! Small dense helpers on top of `nalgebra` used throughout the crate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Cholesky factor of `a + jitter * I`.
pub fn cholesky_jittered(a: &DMatrix<f64>, jitter: f64, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    let mut m = a.clone();
    if jitter > 0.0 {
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
    }
    let chol = Cholesky::new(m).ok_or(Error::Factorization(what))?;
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| !(l[(i, i)] > 0.0) || !l[(i, i)].is_finite()) {
        return Err(Error::Factorization(what));
    }
    Ok(chol)
}

/// `log det A` from a Cholesky factor of `A`.
pub fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}

/// Smallest eigenvalue together with its unit eigenvector.
pub fn min_eigenpair(a: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    (val, eig.eigenvectors.column(idx).into_owned())
}

/// Replaces `a` by `(a + aᵀ) / 2`.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 0.5]));
        let c = cholesky_jittered(&a, 0.0, "test").unwrap();
        assert!((log_det(&c) - 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_rejected_without_jitter() {
        let a = DMatrix::from_element(2, 2, 1.0);
        assert!(cholesky_jittered(&a, 0.0, "test").is_err());
        assert!(cholesky_jittered(&a, 1e-9, "test").is_ok());
    }

    #[test]
    fn min_eigenpair_matches_min_eigenvalue() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (v, e) = min_eigenpair(&a);
        assert!((v - 1.0).abs() < 1e-12);
        assert!((min_eigenvalue(&a) - 1.0).abs() < 1e-12);
        let r = &a * &e - &e * v;
        assert!(r.norm() < 1e-12);
    }
}
