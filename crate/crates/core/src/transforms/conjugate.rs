use crate::error::{Error, Result};
use crate::matrix::{conjugate_partner, ComplexMatrix, DenseMatrix};

/// Labels each cell of a real signal's DFT spectrum as retained (+1),
/// redundant conjugate (-1) or self-conjugate (0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl ReferenceMatrix {
    /// Reference matrix for a `rows×cols` spectrum. Within each conjugate
    /// pair the member with the smaller column index is retained; pairs that
    /// share a column (columns 0 and cols/2) retain the smaller row index.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimensions(format!("{rows}x{cols}")));
        }
        let mut entries = vec![0i8; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let (pi, pj) = conjugate_partner(i, j, rows, cols);
                entries[i * cols + j] = if (pi, pj) == (i, j) {
                    0
                } else if (j, i) < (pj, pi) {
                    1
                } else {
                    -1
                };
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.cols + j]
    }

    pub fn count(&self, value: i8) -> usize {
        self.entries.iter().filter(|&&e| e == value).count()
    }

    /// Cells with label 0 or +1 in row-major order; the free parameters of a
    /// real signal's spectrum.
    pub fn retained_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.rows * self.cols / 2 + 2);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) >= 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Energy weight of a cell in the half matrices: 2 for retained pair
    /// members, 1 for self-conjugate cells, 0 for redundant ones.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.get(i, j) {
            1 => 2.0,
            0 => 1.0,
            _ => 0.0,
        }
    }
}

/// Square reference matrix; `k >= 2`. Odd `k` has a single self-conjugate
/// cell at the origin.
pub fn reference_matrix(k: usize) -> Result<ReferenceMatrix> {
    if k < 2 {
        return Err(Error::InvalidDimensions(format!("reference matrix needs K >= 2, got {k}")));
    }
    ReferenceMatrix::new(k, k)
}

/// Squared-magnitude energies of a spectrum with redundant cells zeroed and
/// retained pair members doubled, so each sums to its share of `‖F‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfMatrices {
    pub h: DenseMatrix,
    pub re: DenseMatrix,
    pub im: DenseMatrix,
}

pub fn half_matrices(f: &ComplexMatrix, r: &ReferenceMatrix) -> Result<HalfMatrices> {
    if f.dims() != (r.rows, r.cols) {
        return Err(Error::DimensionMismatch {
            expected: (r.rows, r.cols),
            actual: f.dims(),
        });
    }
    let (p, q) = f.dims();
    let mut re = DenseMatrix::zeros(p, q);
    let mut im = DenseMatrix::zeros(p, q);
    for i in 0..p {
        for j in 0..q {
            let w = r.weight(i, j);
            let z = f[(i, j)];
            re[(i, j)] = w * z.re * z.re;
            im[(i, j)] = w * z.im * z.im;
        }
    }
    let h = re.add(&im)?;
    Ok(HalfMatrices { h, re, im })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::dft2;

    /// Condition-U predicate written out directly for square `k`.
    fn condition_u(k: usize, i: usize, j: usize) -> i8 {
        let (ki, kj) = ((k - i) % k, (k - j) % k);
        if (ki, kj) == (i, j) {
            return 0;
        }
        let redundant = (j > 0 && j > k - j)
            || ((j == 0 || 2 * j == k) && i > 0 && i > k - i);
        if redundant {
            -1
        } else {
            1
        }
    }

    #[test]
    fn k2_is_all_self_conjugate() {
        let r = reference_matrix(2).unwrap();
        assert_eq!(r.count(0), 4);
        assert!(reference_matrix(1).is_err());
    }

    #[test]
    fn even_counts() {
        for k in [4, 6, 8, 16] {
            let r = reference_matrix(k).unwrap();
            assert_eq!(r.count(0), 4);
            for &(i, j) in &[(0, 0), (0, k / 2), (k / 2, 0), (k / 2, k / 2)] {
                assert_eq!(r.get(i, j), 0);
            }
            assert_eq!(r.count(1), (k * k - 4) / 2);
            assert_eq!(r.count(-1), (k * k - 4) / 2);
            assert_eq!(r.retained_cells().len(), k * k / 2 + 2);
        }
    }

    #[test]
    fn odd_counts() {
        for k in [3, 5, 9] {
            let r = reference_matrix(k).unwrap();
            assert_eq!(r.count(0), 1);
            assert_eq!(r.get(0, 0), 0);
            assert_eq!(r.retained_cells().len(), (k * k).div_ceil(2));
        }
    }

    #[test]
    fn pairs_have_opposite_labels() {
        for (p, q) in [(4, 4), (5, 4), (6, 7)] {
            let r = ReferenceMatrix::new(p, q).unwrap();
            for i in 0..p {
                for j in 0..q {
                    let (pi, pj) = conjugate_partner(i, j, p, q);
                    assert_eq!(r.get(i, j), -r.get(pi, pj));
                }
            }
        }
    }

    #[test]
    fn agrees_with_literal_predicate() {
        for k in 2..=12 {
            let r = reference_matrix(k).unwrap();
            for i in 0..k {
                for j in 0..k {
                    assert_eq!(r.get(i, j), condition_u(k, i, j), "K={k} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn half_matrix_energy() {
        let w = DenseMatrix::from_fn(8, 8, |i, j| ((i * 5 + j * 3 + i * j) % 7) as f64 - 2.9);
        let f = dft2(&w);
        let r = reference_matrix(8).unwrap();
        let hm = half_matrices(&f, &r).unwrap();
        assert!((hm.h.sum() - w.frobenius_sq()).abs() < 1e-9 * w.frobenius_sq());
        for i in 0..8 {
            for j in 0..8 {
                if r.get(i, j) == 0 {
                    assert!(hm.im[(i, j)] < 1e-20);
                }
                assert_eq!(hm.h[(i, j)], hm.re[(i, j)] + hm.im[(i, j)]);
            }
        }
        assert!(half_matrices(&f, &reference_matrix(4).unwrap()).is_err());
    }
}
