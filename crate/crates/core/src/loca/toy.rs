use rand::seq::index;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::trainer::{AltSchedule, Objective};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::stats::{gaussian_matrix, rng_from_seed, Rng};
use crate::transforms::{idct2_sparse, DctBasis, SparseSpectrum};

/// Three-layer linear regression `Y = W3 · iDCT(F2) · W1 · X` whose middle
/// layer is a sparse DCT spectrum. Samples are the columns of `x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToyTaskSpec {
    pub seed: u64,
    pub n_samples: usize,
    pub dim: usize,
    pub input_std: f64,
    pub x: DenseMatrix,
    pub w1: DenseMatrix,
    pub w3: DenseMatrix,
    pub f2: SparseSpectrum,
    pub y: DenseMatrix,
    /// `W1 · X`, fixed because only the middle layer is trained.
    pub h: DenseMatrix,
    pub schedule: AltSchedule,
}

pub const TOY_SAMPLES: usize = 5000;
pub const TOY_DIM: usize = 6;
pub const TOY_BUDGET: usize = 3;
/// Variance of the inputs.
pub const TOY_INPUT_VAR: f64 = 20.0;
/// Variance of `W1`, `W3` and the ground-truth coefficients.
pub const TOY_WEIGHT_VAR: f64 = 0.2;

fn full_rank_gaussian(n: usize, std: f64, rng: &mut Rng) -> DenseMatrix {
    loop {
        let m = gaussian_matrix(n, n, std, rng);
        let s = linalg::singular_values(&m);
        if s[n - 1] > 1e-8 * s[0] {
            return m;
        }
    }
}

/// Ground-truth task for `seed`: inputs with variance 20; `W1`, `W3` and
/// three coefficients with variance 0.2; three distinct uniformly drawn
/// spectrum cells. The schedule defaults to `lr_a = 0.02`, `lr_l = 0.05`
/// and alternation periods of 10 steps.
pub fn build_toy_task(seed: u64) -> Result<ToyTaskSpec> {
    let mut rng = rng_from_seed(seed);
    let (d, n) = (TOY_DIM, TOY_SAMPLES);
    let input_std = TOY_INPUT_VAR.sqrt();
    let x = gaussian_matrix(d, n, input_std, &mut rng);
    let w_std = TOY_WEIGHT_VAR.sqrt();
    let w1 = full_rank_gaussian(d, w_std, &mut rng);
    let w3 = full_rank_gaussian(d, w_std, &mut rng);
    let cells = index::sample(&mut rng, d * d, TOY_BUDGET).into_vec();
    let coeff = Normal::new(0.0, w_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let coefficients = (0..TOY_BUDGET).map(|_| coeff.sample(&mut rng)).collect();
    let locations = cells.iter().map(|&c| (c / d, c % d)).collect();
    let f2 = SparseSpectrum::new((d, d), coefficients, locations)?;
    let w2 = idct2_sparse(&f2, &DctBasis::shared(d, d)?)?;
    let h = w1.matmul(&x)?;
    let y = w3.matmul(&w2)?.matmul(&h)?;
    Ok(ToyTaskSpec {
        seed,
        n_samples: n,
        dim: d,
        input_std,
        x,
        w1,
        w3,
        f2,
        y,
        h,
        schedule: AltSchedule {
            b_a: 10,
            b_l: 10,
            ..AltSchedule::default()
        },
    })
}

impl ToyTaskSpec {
    pub fn dims(&self) -> (usize, usize) {
        (self.dim, self.dim)
    }

    pub fn budget(&self) -> usize {
        self.f2.len()
    }

    pub fn objective(&self) -> ToyObjective<'_> {
        ToyObjective { task: self }
    }

    /// Whether the rounded locations equal the ground-truth cells as a set.
    pub fn recovered(&self, rounded: &[(usize, usize)]) -> bool {
        let mut got = rounded.to_vec();
        let mut want = self.f2.locations.clone();
        got.sort_unstable();
        want.sort_unstable();
        got == want
    }
}

/// Mean squared error of `W3 · ΔW · H` against the labels.
pub struct ToyObjective<'a> {
    task: &'a ToyTaskSpec,
}

impl Objective for ToyObjective<'_> {
    fn dims(&self) -> (usize, usize) {
        self.task.dims()
    }

    fn loss_and_grad(&self, delta_w: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
        let t = self.task;
        let pred = t.w3.matmul(delta_w)?.matmul(&t.h)?;
        let err = pred.sub(&t.y)?;
        let count = (err.rows() * err.cols()) as f64;
        let loss = err.frobenius_sq() / count;
        let grad = t
            .w3
            .transposed_matmul(&err.matmul_transposed(&t.h)?)?
            .scale(2.0 / count);
        Ok((loss, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_shape() {
        let t = build_toy_task(3).unwrap();
        assert_eq!(t.x.dims(), (6, 5000));
        assert_eq!(t.f2.len(), 3);
        let mut cells = t.f2.locations.clone();
        cells.dedup();
        cells.sort_unstable();
        cells.dedup();
        assert_eq!(cells.len(), 3);
        for i in 0..6 {
            let row = t.x.row(i);
            let mean = row.iter().sum::<f64>() / 5000.0;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4999.0;
            assert!((18.0..=22.0).contains(&var), "{var}");
        }
        let w2 = idct2_sparse(&t.f2, &DctBasis::shared(6, 6).unwrap()).unwrap();
        let y = t.w3.matmul(&w2).unwrap().matmul(&t.w1).unwrap().matmul(&t.x).unwrap();
        assert!(y.max_abs_diff(&t.y).unwrap() < 1e-9 * (1.0 + t.y.max_abs()));
        assert!(t.recovered(&[t.f2.locations[2], t.f2.locations[0], t.f2.locations[1]]));
    }

    #[test]
    fn objective_gradient_matches_finite_differences() {
        let t = build_toy_task(5).unwrap();
        let obj = t.objective();
        let dw = DenseMatrix::from_fn(6, 6, |i, j| 0.01 * (i as f64 - j as f64));
        let (_, g) = obj.loss_and_grad(&dw).unwrap();
        let h = 1e-5;
        for &(i, j) in &[(0, 0), (2, 5), (5, 1)] {
            let mut up = dw.clone();
            up[(i, j)] += h;
            let mut dn = dw.clone();
            dn[(i, j)] -= h;
            let fd = (obj.loss_and_grad(&up).unwrap().0 - obj.loss_and_grad(&dn).unwrap().0) / (2.0 * h);
            assert!((fd - g[(i, j)]).abs() < 1e-5 * (1.0 + g[(i, j)].abs()), "{fd} vs {}", g[(i, j)]);
        }
    }

    #[test]
    fn coefficients_converge_at_true_locations() {
        let t = build_toy_task(7).unwrap();
        let l = t.f2.locations.iter().map(|&(i, j)| (i as f64, j as f64)).collect();
        let start = super::super::LocaParam::new(t.dims(), 1.0, vec![0.0; 3], l).unwrap();
        let sched = AltSchedule { b_s: 0, ..t.schedule };
        let st = super::super::train(&t.objective(), start, &sched).unwrap();
        assert!(st.final_loss < 1e-8, "{}", st.final_loss);
        assert!(st.losses.windows(2).all(|w| w[1].loss <= w[0].loss));
    }

    #[test]
    fn same_seed_same_trajectory() {
        let t = build_toy_task(2).unwrap();
        let sched = AltSchedule { b_s: 60, total: 90, ..t.schedule };
        let a = super::super::alternating_train(&t, &sched, &mut rng_from_seed(9)).unwrap();
        let b = super::super::alternating_train(&t, &sched, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }
}
