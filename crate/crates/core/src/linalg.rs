//! Dense least-squares kernels backed by faer.

use faer::{Col, Mat};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn to_faer(x: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

fn svd(x: &Mat<f64>) -> Result<faer::linalg::solvers::Svd<f64>> {
    x.thin_svd().map_err(|e| Error::DegenerateInput(format!("SVD did not converge: {e:?}")))
}

/// Minimum-norm least-squares solution of `x w = y`, treating singular values
/// below `rcond * sigma_max` as zero.
pub fn min_norm_solve(x: &DMatrix<f64>, y: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    let xf = to_faer(x);
    let dec = svd(&xf)?;
    let (u, s, v) = (dec.U(), dec.S(), dec.V());
    let k = s.dim();
    let sigma_max = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Err(Error::DegenerateInput("feature matrix is identically zero".into()));
    }
    let yf = Col::<f64>::from_fn(y.len(), |i| y[i]);
    let mut coeffs = u.transpose() * &yf;
    for i in 0..k {
        coeffs[i] = if s[i] > rcond * sigma_max { coeffs[i] / s[i] } else { 0.0 };
    }
    let w = v * &coeffs;
    Ok(DVector::from_fn(w.nrows(), |i, _| w[i]))
}

/// Orthonormal basis of the column space of `x`, as the left singular
/// vectors whose singular values exceed `tol * sigma_max`.
pub fn column_space_basis(x: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let dec = svd(&to_faer(x))?;
    let (u, s) = (dec.U(), dec.S());
    let k = s.dim();
    let sigma_max = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..k).filter(|&i| sigma_max > 0.0 && s[i] > tol * sigma_max).collect();
    Ok(DMatrix::from_fn(x.nrows(), keep.len(), |i, j| u[(i, keep[j])]))
}

/// Singular values of `x`, descending.
pub fn singular_values(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dec = svd(&to_faer(x))?;
    let s = dec.S();
    let mut out: Vec<f64> = (0..s.dim()).map(|i| s[i]).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Moduli of the eigenvalues of a real square matrix.
pub fn eigenvalue_moduli(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::DegenerateInput(format!("eigenvalue iteration did not converge: {e:?}")))?;
    Ok(eig.iter().map(|z| z.re.hypot(z.im)).collect())
}
