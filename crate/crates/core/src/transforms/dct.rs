use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Orthonormal DCT-II matrix of size `n`:
/// `C[i][j] = sqrt(2/n) * k_i * cos(pi * (2j + 1) * i / (2n))` with
/// `k_0 = 1/sqrt(2)` and `k_i = 1` otherwise.
pub fn build_dct_matrix(n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimensions("DCT size must be at least 1".into()));
    }
    let nf = n as f64;
    let scale = (2.0 / nf).sqrt();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let k = if i == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        scale * k * (PI * (2 * j + 1) as f64 * i as f64 / (2.0 * nf)).cos()
    }))
}

fn cached_matrix(n: usize) -> Result<Arc<DenseMatrix>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DenseMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().expect("DCT cache poisoned").get(&n) {
        return Ok(Arc::clone(m));
    }
    // Built outside the lock; a racing thread may build the same matrix,
    // which is harmless because both results are identical.
    let built = Arc::new(build_dct_matrix(n)?);
    let mut guard = cache.lock().expect("DCT cache poisoned");
    Ok(Arc::clone(guard.entry(n).or_insert(built)))
}

/// Row transform `C` (p×p) and column transform `D` (q×q) for p×q signals.
#[derive(Clone, Debug)]
pub struct DctBasis {
    c: Arc<DenseMatrix>,
    d: Arc<DenseMatrix>,
}

impl DctBasis {
    /// Returns the process-wide basis for `p×q`, building it on first use.
    pub fn shared(p: usize, q: usize) -> Result<Self> {
        Ok(Self {
            c: cached_matrix(p)?,
            d: cached_matrix(q)?,
        })
    }

    /// Builds a private basis that bypasses the global cache.
    pub fn new(p: usize, q: usize) -> Result<Self> {
        Ok(Self {
            c: Arc::new(build_dct_matrix(p)?),
            d: Arc::new(build_dct_matrix(q)?),
        })
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn d(&self) -> &DenseMatrix {
        &self.d
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.c.rows(), self.d.rows())
    }

    pub(crate) fn check(&self, m: &DenseMatrix) -> Result<()> {
        if m.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: m.dims(),
            });
        }
        Ok(())
    }
}

/// Forward 2-D DCT, `C · W · Dᵀ`.
pub fn dct2(w: &DenseMatrix, basis: &DctBasis) -> Result<DenseMatrix> {
    basis.check(w)?;
    basis.c().matmul(w)?.matmul_transposed(basis.d())
}

/// Inverse 2-D DCT, `Cᵀ · F · D`.
pub fn idct2_dense(f: &DenseMatrix, basis: &DctBasis) -> Result<DenseMatrix> {
    basis.check(f)?;
    basis.c().transposed_matmul(f)?.matmul(basis.d())
}

/// One-dimensional orthonormal DCT-II through a single complex FFT of the
/// same length (even/odd reordering followed by a quarter-sample twiddle).
struct Dct1 {
    n: usize,
    fft: Arc<dyn rustfft::Fft<f64>>,
    ifft: Arc<dyn rustfft::Fft<f64>>,
    twiddle: Vec<Complex64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Dct1 {
    fn new(n: usize, planner: &mut FftPlanner<f64>) -> Self {
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let nf = n as f64;
        let twiddle = (0..n)
            .map(|k| {
                let norm = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                Complex64::from_polar(norm, -PI * k as f64 / (2.0 * nf))
            })
            .collect();
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let scratch = vec![Complex64::default(); scratch_len];
        Self {
            n,
            fft,
            ifft,
            twiddle,
            buf: vec![Complex64::default(); n],
            scratch,
        }
    }

    /// Transforms `n` values read with the given stride, writing back in place.
    fn run(&mut self, data: &mut [f64], offset: usize, stride: usize) {
        let n = self.n;
        let half = n.div_ceil(2);
        for k in 0..half {
            self.buf[k] = Complex64::new(data[offset + 2 * k * stride], 0.0);
        }
        for k in 0..n / 2 {
            self.buf[n - 1 - k] = Complex64::new(data[offset + (2 * k + 1) * stride], 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for k in 0..n {
            data[offset + k * stride] = (self.buf[k] * self.twiddle[k]).re;
        }
    }

    /// Inverse of [`Dct1::run`] (orthonormal DCT-III): undo the twiddle on
    /// `X[k] − i·X[n−k]`, inverse FFT, then undo the reordering.
    fn run_inverse(&mut self, data: &mut [f64], offset: usize, stride: usize) {
        let n = self.n;
        let nf = n as f64;
        for k in 0..n {
            let re = data[offset + k * stride];
            let im = if k == 0 { 0.0 } else { -data[offset + (n - k) * stride] };
            let t = self.twiddle[k];
            let s = t.norm_sqr();
            // Dividing by a twiddle is multiplying by its conjugate over |t|².
            self.buf[k] = Complex64::new(re, im) * t.conj() / (s * nf);
        }
        self.ifft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let half = n.div_ceil(2);
        for k in 0..half {
            data[offset + 2 * k * stride] = self.buf[k].re;
        }
        for k in 0..n / 2 {
            data[offset + (2 * k + 1) * stride] = self.buf[n - 1 - k].re;
        }
    }
}

/// FFT-backed 2-D DCT; agrees with [`dct2`] to rounding error at
/// `O(pq log(pq))` cost.
pub fn fast_dct2(w: &DenseMatrix) -> DenseMatrix {
    let (p, q) = w.dims();
    let mut planner = FftPlanner::new();
    let mut out = w.clone();
    let data = out.as_mut_slice();
    let mut rows = Dct1::new(q, &mut planner);
    for i in 0..p {
        rows.run(data, i * q, 1);
    }
    let mut cols = Dct1::new(p, &mut planner);
    for j in 0..q {
        cols.run(data, j, q);
    }
    out
}

/// FFT-backed inverse of [`fast_dct2`]; agrees with [`idct2_dense`] to
/// rounding error.
pub fn fast_idct2(f: &DenseMatrix) -> DenseMatrix {
    let (p, q) = f.dims();
    let mut planner = FftPlanner::new();
    let mut out = f.clone();
    let data = out.as_mut_slice();
    let mut cols = Dct1::new(p, &mut planner);
    for j in 0..q {
        cols.run_inverse(data, j, q);
    }
    let mut rows = Dct1::new(q, &mut planner);
    for i in 0..p {
        rows.run_inverse(data, i * q, 1);
    }
    out
}
