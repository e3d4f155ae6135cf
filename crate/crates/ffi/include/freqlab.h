#ifndef FREQLAB_H
#define FREQLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every fallible entry point.
 */
typedef enum FreqlabStatus {
  FREQLAB_STATUS_OK = 0,
  FREQLAB_STATUS_NULL_POINTER = 1,
  FREQLAB_STATUS_INVALID_DIMENSIONS = 2,
  FREQLAB_STATUS_DIMENSION_MISMATCH = 3,
  FREQLAB_STATUS_OUT_OF_BOUNDS = 4,
  FREQLAB_STATUS_BUDGET_TOO_LARGE = 5,
  FREQLAB_STATUS_INVALID_ARGUMENT = 6,
  FREQLAB_STATUS_NUMERICAL = 7,
  FREQLAB_STATUS_PANIC = 8,
} FreqlabStatus;

/**
 * Orthonormal DCT-II bases for a p×q grid.
 */
typedef struct FreqlabDctBasis FreqlabDctBasis;

/**
 * Coefficients, continuous locations and scale of one sparse DCT update.
 */
typedef struct FreqlabLocaParam FreqlabLocaParam;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *freqlab_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated
 * and always NUL-terminated when `len > 0`). Returns the full message
 * length excluding the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t freqlab_last_error_message(char *buf, size_t len);

/**
 * Creates the DCT bases for a `p`×`q` grid.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FreqlabStatus freqlab_dct_basis_new(size_t p, size_t q, struct FreqlabDctBasis **out);

/**
 * Releases a basis; null is ignored.
 *
 * # Safety
 * `basis` must be null or a handle from [`freqlab_dct_basis_new`] that
 * has not been freed.
 */
void freqlab_dct_basis_free(struct FreqlabDctBasis *basis);

/**
 * Forward 2-D DCT `F = C·W·Dᵀ` of a row-major p×q matrix.
 *
 * # Safety
 * `input` and `out` must point to `input_len` and `out_len` doubles.
 */
enum FreqlabStatus freqlab_dct2(const struct FreqlabDctBasis *basis,
                                const double *input,
                                size_t input_len,
                                double *out,
                                size_t out_len);

/**
 * Inverse 2-D DCT `W = Cᵀ·F·D` of a row-major p×q spectrum.
 *
 * # Safety
 * `input` and `out` must point to `input_len` and `out_len` doubles.
 */
enum FreqlabStatus freqlab_idct2(const struct FreqlabDctBasis *basis,
                                 const double *input,
                                 size_t input_len,
                                 double *out,
                                 size_t out_len);

/**
 * FFT-backed forward 2-D DCT; no basis needed.
 *
 * # Safety
 * `input` and `out` must point to `p*q` doubles each.
 */
enum FreqlabStatus freqlab_fast_dct2(size_t p, size_t q, const double *input, double *out);

/**
 * Inverse DCT of `n` coefficients scattered at integer cells
 * (`rows[i]`, `cols[i]`); colliding cells add up.
 *
 * # Safety
 * `coefficients`, `rows` and `cols` must point to `n` elements, `out` to
 * `out_len` doubles.
 */
enum FreqlabStatus freqlab_idct2_sparse(const struct FreqlabDctBasis *basis,
                                        const double *coefficients,
                                        const size_t *rows,
                                        const size_t *cols,
                                        size_t n,
                                        double *out,
                                        size_t out_len);

/**
 * Creates a parameterization with `budget` coefficients `a` at continuous
 * locations (`loc_rows[i]`, `loc_cols[i]`) in index units on a p×q grid.
 *
 * # Safety
 * `a`, `loc_rows` and `loc_cols` must point to `budget` doubles; `out`
 * must be a valid pointer to writable storage for one handle.
 */
enum FreqlabStatus freqlab_loca_param_new(size_t p,
                                          size_t q,
                                          double alpha,
                                          size_t budget,
                                          const double *a,
                                          const double *loc_rows,
                                          const double *loc_cols,
                                          struct FreqlabLocaParam **out);

/**
 * Releases a parameterization; null is ignored.
 *
 * # Safety
 * `param` must be null or a handle from [`freqlab_loca_param_new`] that
 * has not been freed.
 */
void freqlab_loca_param_free(struct FreqlabLocaParam *param);

/**
 * Number of coefficients, or 0 for a null handle.
 *
 * # Safety
 * `param` must be null or a live handle.
 */
size_t freqlab_loca_budget(const struct FreqlabLocaParam *param);

/**
 * Writes `ΔW = α·iDCT(S(a, round(l)))` as a row-major p×q matrix.
 *
 * # Safety
 * `out` must point to `out_len` doubles.
 */
enum FreqlabStatus freqlab_loca_materialize(const struct FreqlabLocaParam *param,
                                            double *out,
                                            size_t out_len);

/**
 * Coefficient and location gradients for an upstream gradient
 * `∂L/∂ΔW` given as a row-major p×q matrix. Each output holds `budget`
 * doubles.
 *
 * # Safety
 * `upstream` must point to `upstream_len` doubles and each output to
 * `budget` doubles.
 */
enum FreqlabStatus freqlab_loca_gradients(const struct FreqlabLocaParam *param,
                                          const double *upstream,
                                          size_t upstream_len,
                                          double *coeff_grad,
                                          double *row_grad,
                                          double *col_grad);

/**
 * One plain gradient step on the coefficients (`a ← a − lr·g`).
 *
 * # Safety
 * `grad` must point to `budget` doubles.
 */
enum FreqlabStatus freqlab_loca_step_coefficients(struct FreqlabLocaParam *param,
                                                  const double *grad,
                                                  double lr);

/**
 * Copies the rounded integer locations into `rows` and `cols`, each of
 * `budget` elements.
 *
 * # Safety
 * `rows` and `cols` must point to `budget` writable elements.
 */
enum FreqlabStatus freqlab_loca_rounded_locations(const struct FreqlabLocaParam *param,
                                                  size_t *rows,
                                                  size_t *cols);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREQLAB_H */
