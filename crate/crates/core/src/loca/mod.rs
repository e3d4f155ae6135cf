//! Sparse DCT parameterization with learnable coefficients and locations.
//!
//! A weight update is `ΔW = α · Cᵀ · S(a, round(l)) · D`, where `S` scatters
//! the `B` coefficients `a` onto a zero p×q spectrum at the rounded
//! continuous locations `l`. Locations are stored in index units.
//!
//! Backward passes go through `Z = C · (∂L/∂ΔW) · Dᵀ`, computed once per
//! step: coefficient `n` gets `α·Z[l̂ₙ]`, and its location gets a central
//! difference of `Z` around `l̂ₙ` scaled by `α·aₙ`.

mod checkpoint;
pub mod oracle;
mod toy;
mod trainer;

pub use checkpoint::{read_checkpoint, write_checkpoint, write_loss_csv, write_location_csv};
pub use toy::{build_toy_task, ToyObjective, ToyTaskSpec};
pub use trainer::{
    alternating_train, train, AltSchedule, LossRecord, Objective, Phase, TrainerState,
};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::stats::Rng;
use crate::transforms::{dct2, idct2_sparse, DctBasis, SparseSpectrum};

/// Rounds half away from zero, then clamps into the `p×q` grid.
pub fn round_locations(l: &[(f64, f64)], (p, q): (usize, usize)) -> Vec<(usize, usize)> {
    let snap = |x: f64, n: usize| -> usize {
        let r = x.round();
        if r.is_nan() || r <= 0.0 {
            0
        } else {
            (r as usize).min(n - 1)
        }
    };
    l.iter().map(|&(x, y)| (snap(x, p), snap(y, q))).collect()
}

/// Coefficients, continuous locations and scale of one adapted matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocaParam {
    pub dims: (usize, usize),
    pub alpha: f64,
    pub a: Vec<f64>,
    pub l: Vec<(f64, f64)>,
    #[serde(skip, default = "no_basis")]
    basis: Option<DctBasis>,
}

fn no_basis() -> Option<DctBasis> {
    None
}

impl PartialEq for LocaParam {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.alpha == other.alpha && self.a == other.a && self.l == other.l
    }
}

impl LocaParam {
    pub fn new(dims: (usize, usize), alpha: f64, a: Vec<f64>, l: Vec<(f64, f64)>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::InvalidDimensions(format!("{}x{}", dims.0, dims.1)));
        }
        if a.len() != l.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients but {} locations",
                a.len(),
                l.len()
            )));
        }
        if !alpha.is_finite()
            || a.iter().any(|v| !v.is_finite())
            || l.iter().any(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self {
            dims,
            alpha,
            a,
            l,
            basis: Some(DctBasis::shared(dims.0, dims.1)?),
        })
    }

    /// Zero coefficients at locations drawn uniformly over the grid.
    pub fn zero_init(dims: (usize, usize), budget: usize, alpha: f64, rng: &mut Rng) -> Result<Self> {
        let (p, q) = dims;
        if p == 0 || q == 0 {
            return Err(Error::InvalidDimensions(format!("{p}x{q}")));
        }
        let l = (0..budget)
            .map(|_| {
                (
                    rng.random_range(0.0..=(p - 1) as f64),
                    rng.random_range(0.0..=(q - 1) as f64),
                )
            })
            .collect();
        Self::new(dims, alpha, vec![0.0; budget], l)
    }

    pub fn budget(&self) -> usize {
        self.a.len()
    }

    pub fn basis(&self) -> Result<DctBasis> {
        match &self.basis {
            Some(b) => Ok(b.clone()),
            None => DctBasis::shared(self.dims.0, self.dims.1),
        }
    }

    pub fn rounded(&self) -> Vec<(usize, usize)> {
        round_locations(&self.l, self.dims)
    }

    pub fn spectrum(&self) -> SparseSpectrum {
        SparseSpectrum {
            dims: self.dims,
            coefficients: self.a.clone(),
            locations: self.rounded(),
        }
    }

    /// Keeps every continuous location inside `[0, p−1] × [0, q−1]`.
    pub fn clamp_locations(&mut self) {
        let (pm, qm) = ((self.dims.0 - 1) as f64, (self.dims.1 - 1) as f64);
        for (x, y) in &mut self.l {
            *x = x.clamp(0.0, pm);
            *y = y.clamp(0.0, qm);
        }
    }
}

/// `ΔW = α · iDCT(S(a, round(l)))`.
pub fn materialize(param: &LocaParam) -> Result<DenseMatrix> {
    Ok(idct2_sparse(&param.spectrum(), &param.basis()?)?.scale(param.alpha))
}

/// `Z = C · G · Dᵀ` for upstream gradient `G = ∂L/∂ΔW`.
pub fn upstream_to_z(upstream: &DenseMatrix, basis: &DctBasis) -> Result<DenseMatrix> {
    dct2(upstream, basis)
}

fn check_z(param: &LocaParam, z: &DenseMatrix) -> Result<()> {
    if z.dims() != param.dims {
        return Err(Error::DimensionMismatch {
            expected: param.dims,
            actual: z.dims(),
        });
    }
    Ok(())
}

/// `gₙ = α · Z[l̂ₙ]`.
pub fn coeff_gradient(param: &LocaParam, z: &DenseMatrix) -> Result<Vec<f64>> {
    check_z(param, z)?;
    Ok(param
        .rounded()
        .into_iter()
        .map(|c| param.alpha * z[c])
        .collect())
}

/// Difference of `Z` along one axis around index `i` of an axis of length
/// `n`: central inside, one-sided at the edges, zero when `n == 1`.
fn axis_difference(n: usize, i: usize, at: impl Fn(usize) -> f64) -> f64 {
    if n == 1 {
        0.0
    } else if i == 0 {
        at(1) - at(0)
    } else if i == n - 1 {
        at(n - 1) - at(n - 2)
    } else {
        (at(i + 1) - at(i - 1)) / 2.0
    }
}

/// Location gradients `α·aₙ·ΔZ` along both axes.
pub fn location_gradient(param: &LocaParam, z: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
    check_z(param, z)?;
    let (p, q) = param.dims;
    Ok(param
        .rounded()
        .into_iter()
        .zip(&param.a)
        .map(|((i, j), &a)| {
            let s = param.alpha * a;
            let g1 = axis_difference(p, i, |k| z[(k, j)]);
            let g2 = axis_difference(q, j, |k| z[(i, k)]);
            (s * g1, s * g2)
        })
        .collect())
}

/// Plain gradient descent `x ← x − lr·g`.
pub fn sgd_step(values: &[f64], grads: &[f64], lr: f64) -> Result<Vec<f64>> {
    if values.len() != grads.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values but {} gradients",
            values.len(),
            grads.len()
        )));
    }
    Ok(values.iter().zip(grads).map(|(v, g)| v - lr * g).collect())
}
