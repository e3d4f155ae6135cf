//! Numerical lab for frequency-domain weight updates.
//!
//! The crate covers four layers:
//!
//! * [`transforms`]: orthonormal DCT-II (dense, sparse rank-one and
//!   FFT-backed), unitary DFT, and the conjugate-symmetry bookkeeping of a
//!   real signal's spectrum.
//! * [`approx`]: low-rank, Fourier and DCT reconstructions under matched
//!   parameter budgets.
//! * [`rmt`] and [`experiments`]: spectral diagnostics and the Monte Carlo
//!   harness comparing the approximators.
//! * [`loca`]: sparse DCT parameterization with learnable coefficients and
//!   locations, its gradients, and an alternating trainer.

// `!(x >= 0.0)` style checks are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod loca;
pub mod matrix;
pub mod output;
pub mod rmt;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, DenseMatrix};
