use std::ffi::CStr;
use std::ptr;

use freqlab::loca::{self, LocaParam};
use freqlab::transforms::{self, DctBasis};
use freqlab::DenseMatrix;
use freqlab_ffi::*;

fn basis(p: usize, q: usize) -> *mut FreqlabDctBasis {
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { freqlab_dct_basis_new(p, q, &mut b) }, FreqlabStatus::Ok);
    assert!(!b.is_null());
    b
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { freqlab_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(n, s.len());
    s
}

fn sample(p: usize, q: usize) -> Vec<f64> {
    (0..p * q).map(|i| ((i * 37 % 23) as f64) / 7.0 - 1.5).collect()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(freqlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn dct_round_trip_matches_core() {
    let (p, q) = (6, 9);
    let b = basis(p, q);
    let w = sample(p, q);
    let mut f = vec![0.0; p * q];
    let mut back = vec![0.0; p * q];
    let mut fast = vec![0.0; p * q];
    unsafe {
        assert_eq!(freqlab_dct2(b, w.as_ptr(), w.len(), f.as_mut_ptr(), f.len()), FreqlabStatus::Ok);
        assert_eq!(freqlab_idct2(b, f.as_ptr(), f.len(), back.as_mut_ptr(), back.len()), FreqlabStatus::Ok);
        assert_eq!(freqlab_fast_dct2(p, q, w.as_ptr(), fast.as_mut_ptr()), FreqlabStatus::Ok);
        freqlab_dct_basis_free(b);
    }
    let core = transforms::dct2(
        &DenseMatrix::from_vec(p, q, w.clone()).unwrap(),
        &DctBasis::shared(p, q).unwrap(),
    )
    .unwrap();
    assert_eq!(f, core.as_slice());
    for ((x, y), z) in back.iter().zip(&w).zip(fast.iter().zip(&f)) {
        assert!((x - y).abs() < 1e-12);
        assert!((z.0 - z.1).abs() < 1e-12);
    }
}

#[test]
fn sparse_inverse_matches_dense() {
    let (p, q) = (5, 5);
    let b = basis(p, q);
    let a = [0.5, -2.0, 1.25];
    let rows = [0usize, 4, 2];
    let cols = [3usize, 4, 0];
    let mut out = vec![0.0; p * q];
    let st = unsafe { freqlab_idct2_sparse(b, a.as_ptr(), rows.as_ptr(), cols.as_ptr(), 3, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, FreqlabStatus::Ok);
    let mut f = vec![0.0; p * q];
    for i in 0..3 {
        f[rows[i] * q + cols[i]] += a[i];
    }
    let mut dense = vec![0.0; p * q];
    unsafe {
        freqlab_idct2(b, f.as_ptr(), f.len(), dense.as_mut_ptr(), dense.len());
        freqlab_dct_basis_free(b);
    }
    for (x, y) in out.iter().zip(&dense) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { freqlab_dct_basis_new(0, 3, &mut b) }, FreqlabStatus::InvalidDimensions);
    assert!(b.is_null());
    assert!(last_error().starts_with("invalid dimensions"));

    let b = basis(3, 3);
    let w = [1.0; 8];
    let mut out = [0.0; 9];
    let st = unsafe { freqlab_dct2(b, w.as_ptr(), w.len(), out.as_mut_ptr(), out.len()) };
    assert_eq!(st, FreqlabStatus::DimensionMismatch);
    assert!(last_error().contains("expected 9"));

    let st = unsafe { freqlab_dct2(b, ptr::null(), 9, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, FreqlabStatus::NullPointer);
    let st = unsafe { freqlab_dct2(ptr::null(), w.as_ptr(), 9, out.as_mut_ptr(), 9) };
    assert_eq!(st, FreqlabStatus::NullPointer);

    let bad = [f64::NAN; 9];
    let st = unsafe { freqlab_dct2(b, bad.as_ptr(), 9, out.as_mut_ptr(), 9) };
    assert_ne!(st, FreqlabStatus::Ok);

    let rows = [3usize];
    let cols = [0usize];
    let st = unsafe { freqlab_idct2_sparse(b, [1.0].as_ptr(), rows.as_ptr(), cols.as_ptr(), 1, out.as_mut_ptr(), 9) };
    assert_eq!(st, FreqlabStatus::OutOfBounds);

    // A successful call clears the message.
    let good = [1.0; 9];
    assert_eq!(unsafe { freqlab_dct2(b, good.as_ptr(), 9, out.as_mut_ptr(), 9) }, FreqlabStatus::Ok);
    assert_eq!(unsafe { freqlab_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe { freqlab_dct_basis_free(b) };
    unsafe { freqlab_dct_basis_free(ptr::null_mut()) };
}

#[test]
fn loca_handle_matches_core() {
    let (p, q) = (7, 7);
    let a = [0.4, -1.1, 0.9];
    let lr = [0.2, 3.6, 6.0];
    let lc = [5.5, 1.0, 2.4];
    let mut h = ptr::null_mut();
    let st = unsafe { freqlab_loca_param_new(p, q, 1.5, 3, a.as_ptr(), lr.as_ptr(), lc.as_ptr(), &mut h) };
    assert_eq!(st, FreqlabStatus::Ok);
    assert_eq!(unsafe { freqlab_loca_budget(h) }, 3);

    let core = LocaParam::new((p, q), 1.5, a.to_vec(), lr.iter().copied().zip(lc).collect()).unwrap();
    let mut dw = vec![0.0; p * q];
    assert_eq!(unsafe { freqlab_loca_materialize(h, dw.as_mut_ptr(), dw.len()) }, FreqlabStatus::Ok);
    assert_eq!(dw, loca::materialize(&core).unwrap().as_slice());

    let upstream = sample(p, q);
    let (mut gc, mut gr, mut gl) = ([0.0; 3], [0.0; 3], [0.0; 3]);
    let st = unsafe {
        freqlab_loca_gradients(h, upstream.as_ptr(), upstream.len(), gc.as_mut_ptr(), gr.as_mut_ptr(), gl.as_mut_ptr())
    };
    assert_eq!(st, FreqlabStatus::Ok);
    let z = loca::upstream_to_z(&DenseMatrix::from_vec(p, q, upstream).unwrap(), &core.basis().unwrap()).unwrap();
    assert_eq!(gc.to_vec(), loca::coeff_gradient(&core, &z).unwrap());
    let want = loca::location_gradient(&core, &z).unwrap();
    for i in 0..3 {
        assert_eq!((gr[i], gl[i]), want[i]);
    }

    let (mut rows, mut cols) = ([9usize; 3], [9usize; 3]);
    assert_eq!(unsafe { freqlab_loca_rounded_locations(h, rows.as_mut_ptr(), cols.as_mut_ptr()) }, FreqlabStatus::Ok);
    assert_eq!(rows, [0, 4, 6]);
    assert_eq!(cols, [6, 1, 2]);

    assert_eq!(unsafe { freqlab_loca_step_coefficients(h, gc.as_ptr(), 0.5) }, FreqlabStatus::Ok);
    let mut after = vec![0.0; p * q];
    unsafe { freqlab_loca_materialize(h, after.as_mut_ptr(), after.len()) };
    let stepped = LocaParam::new((p, q), 1.5, loca::sgd_step(&a, &gc, 0.5).unwrap(), core.l.clone()).unwrap();
    assert_eq!(after, loca::materialize(&stepped).unwrap().as_slice());
    unsafe { freqlab_loca_param_free(h) };
}

#[test]
fn loca_rejects_bad_parameters() {
    let mut h = ptr::null_mut();
    let a = [1.0];
    let l = [f64::INFINITY];
    let st = unsafe { freqlab_loca_param_new(4, 4, 1.0, 1, a.as_ptr(), l.as_ptr(), l.as_ptr(), &mut h) };
    assert_eq!(st, FreqlabStatus::InvalidArgument);
    assert!(h.is_null());
    let st = unsafe { freqlab_loca_param_new(4, 4, 1.0, 1, a.as_ptr(), ptr::null(), a.as_ptr(), &mut h) };
    assert_eq!(st, FreqlabStatus::NullPointer);
    assert_eq!(unsafe { freqlab_loca_budget(ptr::null()) }, 0);
}
