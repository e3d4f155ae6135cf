//! Orthonormal DCT and unitary DFT machinery.
//!
//! Everything here is a pure function over immutable inputs. DCT bases are
//! cached globally per size and shared through `Arc`, so callers on any
//! thread can ask for `DctBasis::shared(p, q)` without coordinating.

mod conjugate;
mod dct;
mod dft;
mod sparse;

pub use conjugate::{half_matrices, reference_matrix, HalfMatrices, ReferenceMatrix};
pub use dct::{build_dct_matrix, dct2, fast_dct2, fast_idct2, idct2_dense, DctBasis};
pub use dft::{dft2, idft2};
pub use sparse::{idct2_sparse, scatter, SparseSpectrum};
