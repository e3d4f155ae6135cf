//! Reference gradients built without the `Z` shortcut, for checking the
//! fast path: explicit derivative matrices of `ΔW` contracted with the
//! upstream gradient, and central finite differences of the loss.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{coeff_gradient, location_gradient, materialize, upstream_to_z, LocaParam};
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::stats::{derive_seed, gaussian_matrix, rng_from_seed};
use crate::transforms::{idct2_dense, scatter};

fn inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Neighbours used by the difference along one axis and the divisor.
fn stencil(n: usize, i: usize) -> Option<(usize, usize, f64)> {
    if n == 1 {
        None
    } else if i == 0 {
        Some((1, 0, 1.0))
    } else if i == n - 1 {
        Some((n - 1, n - 2, 1.0))
    } else {
        Some((i + 1, i - 1, 2.0))
    }
}

/// `tr(Gᵀ · ∂ΔW/∂θ)` for every coefficient and location, where each
/// `∂ΔW/∂θ` is materialized densely: a unit scatter for coefficients, and
/// the difference of two shifted scatters of `aₙ` for locations.
pub fn trace_oracle(
    param: &LocaParam,
    upstream: &DenseMatrix,
) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
    let basis = param.basis()?;
    let dims = param.dims;
    let rounded = param.rounded();
    let deriv = |coeff: f64, plus: (usize, usize), minus: Option<((usize, usize), f64)>| {
        let mut s = scatter(&[coeff], &[plus], dims)?;
        if let Some((m, div)) = minus {
            s[m] -= coeff;
            s = s.scale(1.0 / div);
        }
        Ok::<_, crate::error::Error>(idct2_dense(&s, &basis)?.scale(param.alpha))
    };
    let mut coeff = Vec::with_capacity(rounded.len());
    let mut loc = Vec::with_capacity(rounded.len());
    for (&(i, j), &a) in rounded.iter().zip(&param.a) {
        coeff.push(inner(upstream, &deriv(1.0, (i, j), None)?));
        let g1 = match stencil(dims.0, i) {
            Some((up, dn, div)) => inner(upstream, &deriv(a, (up, j), Some(((dn, j), div)))?),
            None => 0.0,
        };
        let g2 = match stencil(dims.1, j) {
            Some((up, dn, div)) => inner(upstream, &deriv(a, (i, up), Some(((i, dn), div)))?),
            None => 0.0,
        };
        loc.push((g1, g2));
    }
    Ok((coeff, loc))
}

/// Central finite differences of `loss` with respect to each coefficient.
pub fn finite_difference_coeffs(
    param: &LocaParam,
    h: f64,
    loss: impl Fn(&DenseMatrix) -> f64,
) -> Result<Vec<f64>> {
    (0..param.budget())
        .map(|n| {
            let mut up = param.clone();
            up.a[n] += h;
            let mut dn = param.clone();
            dn.a[n] -= h;
            Ok((loss(&materialize(&up)?) - loss(&materialize(&dn)?)) / (2.0 * h))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradcheckCase {
    pub case: usize,
    pub size: usize,
    pub budget: usize,
    pub coeff_abs_err: f64,
    pub location_abs_err: f64,
    pub fd_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub cases: Vec<GradcheckCase>,
    pub max_coeff_abs_err: f64,
    pub max_location_abs_err: f64,
    pub max_fd_rel_err: f64,
    pub oracle_tol: f64,
    pub fd_tol: f64,
    pub pass: bool,
}

pub const ORACLE_TOL: f64 = 1e-10;
pub const FD_TOL: f64 = 1e-5;

/// Compares the `Z`-based gradients with [`trace_oracle`] and finite
/// differences on random weighted quadratic losses
/// `L = Σ M_ij (ΔW_ij − T_ij)²` with budgets up to 8 on grids up to 16×16.
pub fn run_gradcheck(cases: usize, seed: u64) -> Result<GradcheckReport> {
    let mut out = Vec::with_capacity(cases);
    for case in 0..cases {
        let mut rng = rng_from_seed(derive_seed(seed, &[case as u64]));
        let n = rng.random_range(2..=16);
        let budget = rng.random_range(1..=8);
        let alpha = rng.random_range(0.5..2.0);
        let a = (0..budget).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l = (0..budget)
            .map(|_| {
                (
                    rng.random_range(-0.4..(n as f64 - 0.6)),
                    rng.random_range(-0.4..(n as f64 - 0.6)),
                )
            })
            .collect();
        let param = LocaParam::new((n, n), alpha, a, l)?;
        let target = gaussian_matrix(n, n, 0.3, &mut rng);
        let weight = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(0.5..1.5));
        let loss = |dw: &DenseMatrix| -> f64 {
            dw.as_slice()
                .iter()
                .zip(target.as_slice())
                .zip(weight.as_slice())
                .map(|((d, t), m)| m * (d - t) * (d - t))
                .sum()
        };
        let dw = materialize(&param)?;
        let upstream = DenseMatrix::from_fn(n, n, |i, j| 2.0 * weight[(i, j)] * (dw[(i, j)] - target[(i, j)]));
        let z = upstream_to_z(&upstream, &param.basis()?)?;
        let gc = coeff_gradient(&param, &z)?;
        let gl = location_gradient(&param, &z)?;
        let (oc, ol) = trace_oracle(&param, &upstream)?;
        let coeff_abs_err = gc.iter().zip(&oc).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let location_abs_err = gl
            .iter()
            .zip(&ol)
            .map(|(x, y)| (x.0 - y.0).abs().max((x.1 - y.1).abs()))
            .fold(0.0, f64::max);
        let fd = finite_difference_coeffs(&param, 1e-4, loss)?;
        let fd_rel_err = gc
            .iter()
            .zip(&fd)
            .map(|(g, f)| (g - f).abs() / g.abs().max(f.abs()).max(1e-8))
            .fold(0.0, f64::max);
        out.push(GradcheckCase {
            case,
            size: n,
            budget,
            coeff_abs_err,
            location_abs_err,
            fd_rel_err,
        });
    }
    let max = |f: fn(&GradcheckCase) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let max_coeff_abs_err = max(|c| c.coeff_abs_err);
    let max_location_abs_err = max(|c| c.location_abs_err);
    let max_fd_rel_err = max(|c| c.fd_rel_err);
    Ok(GradcheckReport {
        pass: max_coeff_abs_err < ORACLE_TOL
            && max_location_abs_err < ORACLE_TOL
            && max_fd_rel_err < FD_TOL,
        cases: out,
        max_coeff_abs_err,
        max_location_abs_err,
        max_fd_rel_err,
        oracle_tol: ORACLE_TOL,
        fd_tol: FD_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::DctBasis;

    #[test]
    fn small_gradcheck_passes() {
        let r = run_gradcheck(5, 1).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn z_matches_brute_force_jacobian() {
        // Jacobian of vec(idct2_dense(F)) with respect to vec(F), applied
        // to an upstream gradient, on a 4×4 grid.
        let basis = DctBasis::shared(4, 4).unwrap();
        let g = DenseMatrix::from_fn(4, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let z = upstream_to_z(&g, &basis).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                let mut e = DenseMatrix::zeros(4, 4);
                e[(u, v)] = 1.0;
                let col = idct2_dense(&e, &basis).unwrap();
                assert!((inner(&g, &col) - z[(u, v)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn location_sign_points_toward_target() {
        // Loss ‖ΔW − iDCT(unit at (i0+1, j0))‖² with a positive coefficient
        // at (i0, j0): descent should push the row location upward.
        let basis = DctBasis::shared(8, 8).unwrap();
        let mut unit = DenseMatrix::zeros(8, 8);
        unit[(4, 2)] = 1.0;
        let target = idct2_dense(&unit, &basis).unwrap();
        let p = LocaParam::new((8, 8), 1.0, vec![0.5], vec![(3.0, 2.0)]).unwrap();
        let dw = materialize(&p).unwrap();
        let g = dw.sub(&target).unwrap().scale(2.0);
        let z = upstream_to_z(&g, &basis).unwrap();
        let (g1, g2) = location_gradient(&p, &z).unwrap()[0];
        assert!(g1 < 0.0, "{g1}");
        assert!(g2.abs() < 1e-12);
    }
}
