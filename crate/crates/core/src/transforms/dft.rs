use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::Result;
use crate::matrix::{ComplexMatrix, DenseMatrix};

fn fft2_in_place(data: &mut [Complex64], p: usize, q: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft(q, direction);
    let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(q) {
        row_fft.process_with_scratch(row, &mut scratch);
    }
    let col_fft = planner.plan_fft(p, direction);
    let mut col = vec![Complex64::default(); p];
    let mut scratch = vec![Complex64::default(); col_fft.get_inplace_scratch_len()];
    for j in 0..q {
        for i in 0..p {
            col[i] = data[i * q + j];
        }
        col_fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..p {
            data[i * q + j] = col[i];
        }
    }
    let norm = 1.0 / ((p * q) as f64).sqrt();
    for z in data.iter_mut() {
        *z *= norm;
    }
}

/// Unitary 2-D DFT (`1/sqrt(pq)` scaling), so `Σ|F|² = ‖W‖²`.
pub fn dft2(w: &DenseMatrix) -> ComplexMatrix {
    let (p, q) = w.dims();
    let mut data: Vec<Complex64> = w.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut data, p, q, FftDirection::Forward);
    let mut f = ComplexMatrix::from_vec(p, q, data).expect("shape preserved");
    f.conjugate_symmetric = true;
    f
}

/// Inverse of [`dft2`]; the result stays complex so callers can check the
/// imaginary residue of a supposedly real reconstruction.
pub fn idft2(f: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (p, q) = f.dims();
    let mut data = f.as_slice().to_vec();
    fft2_in_place(&mut data, p, q, FftDirection::Inverse);
    ComplexMatrix::from_vec(p, q, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: usize, q: usize) -> DenseMatrix {
        DenseMatrix::from_fn(p, q, |i, j| ((i * 7 + j * 13 + i * j) % 9) as f64 - 3.7)
    }

    #[test]
    fn parseval_and_symmetry() {
        for (p, q) in [(8, 8), (5, 6), (1, 4)] {
            let w = sample(p, q);
            let f = dft2(&w);
            assert!(f.conjugate_symmetric);
            assert!((f.norm_sq() - w.frobenius_sq()).abs() < 1e-9 * w.frobenius_sq());
            assert!(f.conjugate_symmetry_residual() < 1e-10);
        }
    }

    #[test]
    fn constant_goes_to_dc() {
        let f = dft2(&DenseMatrix::filled(4, 4, 2.0));
        assert!((f[(0, 0)].re - 8.0).abs() < 1e-12);
        let off: f64 = f.as_slice().iter().skip(1).map(|z| z.norm()).sum();
        assert!(off < 1e-12);
    }

    #[test]
    fn round_trip() {
        let w = sample(6, 10);
        let back = idft2(&dft2(&w)).unwrap();
        assert!(back.max_imag() < 1e-12);
        assert!(back.real_part().max_abs_diff(&w).unwrap() < 1e-12);
    }
}
