//! Thin adapters onto nalgebra's dense decompositions.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn sort_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    sort_desc(to_na(m).singular_values().iter().copied().collect())
}

/// Eigenvalues of a symmetric matrix in descending order. Only the lower
/// triangle is read.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::InvalidDimensions(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let eig = SymmetricEigen::new(to_na(m));
    Ok(sort_desc(eig.eigenvalues.iter().copied().collect()))
}

/// Best rank-`r` approximation in Frobenius norm, from a full SVD.
pub fn truncated_svd(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let svd = SVD::new(to_na(m), true, true);
    let (u, vt) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numerical("SVD did not return singular vectors".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let (p, q) = m.dims();
    let mut out = DenseMatrix::zeros(p, q);
    for &k in order.iter().take(r) {
        let s = svd.singular_values[k];
        for i in 0..p {
            let us = u[(i, k)] * s;
            for j in 0..q {
                out[(i, j)] += us * vt[(k, j)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_cases() {
        let d = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let s = singular_values(&d);
        assert!((s[0] - 3.0).abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-12);
        let e = symmetric_eigenvalues(&d).unwrap();
        assert!((e[1] - 2.0).abs() < 1e-12);
        let t = truncated_svd(&d, 1).unwrap();
        assert!((t[(1, 1)] - 3.0).abs() < 1e-12);
        assert!((t.frobenius_sq() - 9.0).abs() < 1e-10);
        assert!(symmetric_eigenvalues(&DenseMatrix::zeros(2, 3)).is_err());
    }
}
