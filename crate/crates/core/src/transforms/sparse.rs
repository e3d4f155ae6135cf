use serde::{Deserialize, Serialize};

use super::dct::DctBasis;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Budget-`B` list of DCT coefficients at integer grid cells of a p×q
/// spectrum. Cell `(0, 0)` is the DC component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSpectrum {
    pub dims: (usize, usize),
    pub coefficients: Vec<f64>,
    pub locations: Vec<(usize, usize)>,
}

impl SparseSpectrum {
    pub fn new(
        dims: (usize, usize),
        coefficients: Vec<f64>,
        locations: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::InvalidDimensions(format!("{}x{}", dims.0, dims.1)));
        }
        if coefficients.len() != locations.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients but {} locations",
                coefficients.len(),
                locations.len()
            )));
        }
        let s = Self {
            dims,
            coefficients,
            locations,
        };
        s.check_bounds()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn check_bounds(&self) -> Result<()> {
        let (p, q) = self.dims;
        for &(r, c) in &self.locations {
            if r >= p || c >= q {
                return Err(Error::OutOfBounds {
                    row: r as i64,
                    col: c as i64,
                    rows: p,
                    cols: q,
                });
            }
        }
        Ok(())
    }
}

/// Places each coefficient on a zero `p×q` matrix at its location.
/// Colliding locations accumulate by summation.
pub fn scatter(
    coefficients: &[f64],
    locations: &[(usize, usize)],
    dims: (usize, usize),
) -> Result<DenseMatrix> {
    let s = SparseSpectrum::new(dims, coefficients.to_vec(), locations.to_vec())?;
    let mut m = DenseMatrix::zeros(dims.0, dims.1);
    for (&a, &(r, c)) in s.coefficients.iter().zip(&s.locations) {
        m[(r, c)] += a;
    }
    Ok(m)
}

/// Inverse DCT of a sparse spectrum as a sum of rank-one outer products
/// `a_i · C[l1_i, :]ᵀ · D[l2_i, :]`, costing `O(B·p·q)`.
pub fn idct2_sparse(spectrum: &SparseSpectrum, basis: &DctBasis) -> Result<DenseMatrix> {
    if basis.dims() != spectrum.dims {
        return Err(Error::DimensionMismatch {
            expected: basis.dims(),
            actual: spectrum.dims,
        });
    }
    spectrum.check_bounds()?;
    let (p, q) = spectrum.dims;
    let mut out = DenseMatrix::zeros(p, q);
    let data = out.as_mut_slice();
    for (&a, &(l1, l2)) in spectrum.coefficients.iter().zip(&spectrum.locations) {
        if a == 0.0 {
            continue;
        }
        let c_row = basis.c().row(l1);
        let d_row = basis.d().row(l2);
        for (x, &cx) in c_row.iter().enumerate() {
            let s = a * cx;
            let dst = &mut data[x * q..(x + 1) * q];
            for (o, &dy) in dst.iter_mut().zip(d_row) {
                *o += s * dy;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::idct2_dense;

    #[test]
    fn scatter_cases() {
        assert_eq!(scatter(&[], &[], (3, 3)).unwrap(), DenseMatrix::zeros(3, 3));
        let m = scatter(&[2.0], &[(1, 3)], (4, 4)).unwrap();
        assert_eq!(m[(1, 3)], 2.0);
        assert_eq!(m.sum(), 2.0);
        let m = scatter(&[1.0, 2.0], &[(0, 0), (0, 0)], (4, 4)).unwrap();
        assert_eq!(m[(0, 0)], 3.0);
        assert!(matches!(
            scatter(&[1.0], &[(4, 0)], (4, 4)),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(scatter(&[1.0], &[], (4, 4)).is_err());
    }

    #[test]
    fn sparse_matches_dense() {
        let basis = DctBasis::shared(16, 16).unwrap();
        let s = SparseSpectrum::new(
            (16, 16),
            vec![0.7, -1.3, 2.1],
            vec![(0, 5), (15, 15), (7, 2)],
        )
        .unwrap();
        let sparse = idct2_sparse(&s, &basis).unwrap();
        let dense = idct2_dense(&scatter(&s.coefficients, &s.locations, s.dims).unwrap(), &basis)
            .unwrap();
        assert!(sparse.max_abs_diff(&dense).unwrap() < 1e-10);
    }

    #[test]
    fn empty_and_dc() {
        let basis = DctBasis::shared(4, 4).unwrap();
        let empty = SparseSpectrum::new((4, 4), vec![], vec![]).unwrap();
        assert_eq!(idct2_sparse(&empty, &basis).unwrap().max_abs(), 0.0);
        let dc = SparseSpectrum::new((4, 4), vec![1.0], vec![(0, 0)]).unwrap();
        let w = idct2_sparse(&dc, &basis).unwrap();
        assert!(w.max_abs_diff(&DenseMatrix::filled(4, 4, 0.25)).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_mismatched_basis() {
        let basis = DctBasis::shared(4, 5).unwrap();
        let s = SparseSpectrum::new((5, 4), vec![1.0], vec![(0, 0)]).unwrap();
        assert!(idct2_sparse(&s, &basis).is_err());
    }
}
