//! C ABI over the freqlab transforms and the sparse DCT parameterization.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`FreqlabStatus`]; on failure a description is kept per thread and can be
//! copied out with [`freqlab_last_error_message`]. Matrices are dense
//! row-major `double` buffers whose lengths are passed explicitly.
//!
//! Handles are not synchronized: share one across threads only for
//! read-only calls.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use freqlab::loca::{self, LocaParam};
use freqlab::transforms::{self, DctBasis, SparseSpectrum};
use freqlab::{DenseMatrix, Error};

/// Result codes shared by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreqlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimensions = 2,
    DimensionMismatch = 3,
    OutOfBounds = 4,
    BudgetTooLarge = 5,
    InvalidArgument = 6,
    Numerical = 7,
    Panic = 8,
}

/// Orthonormal DCT-II bases for a p×q grid.
pub struct FreqlabDctBasis {
    inner: DctBasis,
}

/// Coefficients, continuous locations and scale of one sparse DCT update.
pub struct FreqlabLocaParam {
    inner: LocaParam,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FreqlabStatus {
    match e {
        Error::InvalidDimensions(_) => FreqlabStatus::InvalidDimensions,
        Error::DimensionMismatch { .. } => FreqlabStatus::DimensionMismatch,
        Error::OutOfBounds { .. } => FreqlabStatus::OutOfBounds,
        Error::BudgetTooLarge { .. } => FreqlabStatus::BudgetTooLarge,
        Error::InvalidArgument(_) | Error::Parse(_) => FreqlabStatus::InvalidArgument,
        Error::Degenerate(_) | Error::Numerical(_) | Error::Diverged { .. } => FreqlabStatus::Numerical,
    }
}

struct Fail(FreqlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FreqlabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> FreqlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FreqlabStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            FreqlabStatus::Panic
        }
    }
}

unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

fn check_len(what: &str, len: usize, want: usize) -> Result<(), Fail> {
    if len != want {
        return Err(Fail(
            FreqlabStatus::DimensionMismatch,
            format!("{what} has {len} values, expected {want}"),
        ));
    }
    Ok(())
}

unsafe fn matrix(ptr: *const f64, len: usize, (p, q): (usize, usize), what: &str) -> Result<DenseMatrix, Fail> {
    check_len(what, len, p * q)?;
    Ok(DenseMatrix::from_vec(p, q, input(ptr, len, what)?.to_vec())?)
}

unsafe fn write_matrix(m: &DenseMatrix, ptr: *mut f64, len: usize, what: &str) -> Result<(), Fail> {
    check_len(what, len, m.as_slice().len())?;
    output(ptr, len, what)?.copy_from_slice(m.as_slice());
    Ok(())
}

unsafe fn basis_ref<'a>(b: *const FreqlabDctBasis) -> Result<&'a FreqlabDctBasis, Fail> {
    b.as_ref().ok_or_else(|| null("basis"))
}

unsafe fn param_ref<'a>(p: *const FreqlabLocaParam) -> Result<&'a FreqlabLocaParam, Fail> {
    p.as_ref().ok_or_else(|| null("param"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn freqlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated
/// and always NUL-terminated when `len > 0`). Returns the full message
/// length excluding the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn freqlab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates the DCT bases for a `p`×`q` grid.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn freqlab_dct_basis_new(p: usize, q: usize, out: *mut *mut FreqlabDctBasis) -> FreqlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = DctBasis::shared(p, q)?;
        *out = Box::into_raw(Box::new(FreqlabDctBasis { inner }));
        Ok(())
    })
}

/// Releases a basis; null is ignored.
///
/// # Safety
/// `basis` must be null or a handle from [`freqlab_dct_basis_new`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn freqlab_dct_basis_free(basis: *mut FreqlabDctBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Forward 2-D DCT `F = C·W·Dᵀ` of a row-major p×q matrix.
///
/// # Safety
/// `input` and `out` must point to `input_len` and `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn freqlab_dct2(
    basis: *const FreqlabDctBasis,
    input: *const f64,
    input_len: usize,
    out: *mut f64,
    out_len: usize,
) -> FreqlabStatus {
    guard(|| {
        let b = &basis_ref(basis)?.inner;
        let w = matrix(input, input_len, b.dims(), "input")?;
        write_matrix(&transforms::dct2(&w, b)?, out, out_len, "out")
    })
}

/// Inverse 2-D DCT `W = Cᵀ·F·D` of a row-major p×q spectrum.
///
/// # Safety
/// `input` and `out` must point to `input_len` and `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn freqlab_idct2(
    basis: *const FreqlabDctBasis,
    input: *const f64,
    input_len: usize,
    out: *mut f64,
    out_len: usize,
) -> FreqlabStatus {
    guard(|| {
        let b = &basis_ref(basis)?.inner;
        let f = matrix(input, input_len, b.dims(), "input")?;
        write_matrix(&transforms::idct2_dense(&f, b)?, out, out_len, "out")
    })
}

/// FFT-backed forward 2-D DCT; no basis needed.
///
/// # Safety
/// `input` and `out` must point to `p*q` doubles each.
#[no_mangle]
pub unsafe extern "C" fn freqlab_fast_dct2(p: usize, q: usize, input: *const f64, out: *mut f64) -> FreqlabStatus {
    guard(|| {
        if p == 0 || q == 0 {
            return Err(Fail(FreqlabStatus::InvalidDimensions, format!("{p}x{q}")));
        }
        let w = matrix(input, p * q, (p, q), "input")?;
        write_matrix(&transforms::fast_dct2(&w), out, p * q, "out")
    })
}

/// Inverse DCT of `n` coefficients scattered at integer cells
/// (`rows[i]`, `cols[i]`); colliding cells add up.
///
/// # Safety
/// `coefficients`, `rows` and `cols` must point to `n` elements, `out` to
/// `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn freqlab_idct2_sparse(
    basis: *const FreqlabDctBasis,
    coefficients: *const f64,
    rows: *const usize,
    cols: *const usize,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> FreqlabStatus {
    guard(|| {
        let b = &basis_ref(basis)?.inner;
        let a = input(coefficients, n, "coefficients")?.to_vec();
        let (r, c) = if n == 0 {
            (&[][..], &[][..])
        } else if rows.is_null() || cols.is_null() {
            return Err(null("rows or cols"));
        } else {
            (slice::from_raw_parts(rows, n), slice::from_raw_parts(cols, n))
        };
        let spec = SparseSpectrum::new(b.dims(), a, r.iter().copied().zip(c.iter().copied()).collect())?;
        write_matrix(&transforms::idct2_sparse(&spec, b)?, out, out_len, "out")
    })
}

/// Creates a parameterization with `budget` coefficients `a` at continuous
/// locations (`loc_rows[i]`, `loc_cols[i]`) in index units on a p×q grid.
///
/// # Safety
/// `a`, `loc_rows` and `loc_cols` must point to `budget` doubles; `out`
/// must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_param_new(
    p: usize,
    q: usize,
    alpha: f64,
    budget: usize,
    a: *const f64,
    loc_rows: *const f64,
    loc_cols: *const f64,
    out: *mut *mut FreqlabLocaParam,
) -> FreqlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = input(a, budget, "a")?.to_vec();
        let lr = input(loc_rows, budget, "loc_rows")?;
        let lc = input(loc_cols, budget, "loc_cols")?;
        let l = lr.iter().copied().zip(lc.iter().copied()).collect();
        let inner = LocaParam::new((p, q), alpha, a, l)?;
        *out = Box::into_raw(Box::new(FreqlabLocaParam { inner }));
        Ok(())
    })
}

/// Releases a parameterization; null is ignored.
///
/// # Safety
/// `param` must be null or a handle from [`freqlab_loca_param_new`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_param_free(param: *mut FreqlabLocaParam) {
    if !param.is_null() {
        drop(Box::from_raw(param));
    }
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `param` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_budget(param: *const FreqlabLocaParam) -> usize {
    param.as_ref().map_or(0, |p| p.inner.budget())
}

/// Writes `ΔW = α·iDCT(S(a, round(l)))` as a row-major p×q matrix.
///
/// # Safety
/// `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_materialize(
    param: *const FreqlabLocaParam,
    out: *mut f64,
    out_len: usize,
) -> FreqlabStatus {
    guard(|| {
        let p = &param_ref(param)?.inner;
        write_matrix(&loca::materialize(p)?, out, out_len, "out")
    })
}

/// Coefficient and location gradients for an upstream gradient
/// `∂L/∂ΔW` given as a row-major p×q matrix. Each output holds `budget`
/// doubles.
///
/// # Safety
/// `upstream` must point to `upstream_len` doubles and each output to
/// `budget` doubles.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_gradients(
    param: *const FreqlabLocaParam,
    upstream: *const f64,
    upstream_len: usize,
    coeff_grad: *mut f64,
    row_grad: *mut f64,
    col_grad: *mut f64,
) -> FreqlabStatus {
    guard(|| {
        let p = &param_ref(param)?.inner;
        let g = matrix(upstream, upstream_len, p.dims, "upstream")?;
        let z = loca::upstream_to_z(&g, &p.basis()?)?;
        let gc = loca::coeff_gradient(p, &z)?;
        let gl = loca::location_gradient(p, &z)?;
        let n = p.budget();
        output(coeff_grad, n, "coeff_grad")?.copy_from_slice(&gc);
        let rows = output(row_grad, n, "row_grad")?;
        let cols = output(col_grad, n, "col_grad")?;
        for (i, (g1, g2)) in gl.into_iter().enumerate() {
            rows[i] = g1;
            cols[i] = g2;
        }
        Ok(())
    })
}

/// One plain gradient step on the coefficients (`a ← a − lr·g`).
///
/// # Safety
/// `grad` must point to `budget` doubles.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_step_coefficients(
    param: *mut FreqlabLocaParam,
    grad: *const f64,
    lr: f64,
) -> FreqlabStatus {
    guard(|| {
        let p = &mut param.as_mut().ok_or_else(|| null("param"))?.inner;
        let g = input(grad, p.budget(), "grad")?;
        p.a = loca::sgd_step(&p.a, g, lr)?;
        Ok(())
    })
}

/// Copies the rounded integer locations into `rows` and `cols`, each of
/// `budget` elements.
///
/// # Safety
/// `rows` and `cols` must point to `budget` writable elements.
#[no_mangle]
pub unsafe extern "C" fn freqlab_loca_rounded_locations(
    param: *const FreqlabLocaParam,
    rows: *mut usize,
    cols: *mut usize,
) -> FreqlabStatus {
    guard(|| {
        let p = &param_ref(param)?.inner;
        let n = p.budget();
        if n == 0 {
            return Ok(());
        }
        if rows.is_null() || cols.is_null() {
            return Err(null("rows or cols"));
        }
        let (r, c) = (slice::from_raw_parts_mut(rows, n), slice::from_raw_parts_mut(cols, n));
        for (i, (x, y)) in p.rounded().into_iter().enumerate() {
            r[i] = x;
            c[i] = y;
        }
        Ok(())
    })
}
