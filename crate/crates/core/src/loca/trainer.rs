use serde::{Deserialize, Serialize};

use super::{coeff_gradient, location_gradient, materialize, sgd_step, upstream_to_z, LocaParam};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Loss of a weight update and its gradient with respect to the update.
pub trait Objective {
    fn dims(&self) -> (usize, usize);
    fn loss_and_grad(&self, delta_w: &DenseMatrix) -> Result<(f64, DenseMatrix)>;
}

/// Alternating schedule: during the first `b_s` steps, cycles of `b_a`
/// coefficient steps followed by `b_l` location steps; afterwards
/// coefficient steps only, up to `total` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltSchedule {
    pub b_a: usize,
    pub b_l: usize,
    pub b_s: usize,
    pub total: usize,
    pub lr_a: f64,
    pub lr_l: f64,
}

impl Default for AltSchedule {
    fn default() -> Self {
        Self {
            b_a: 10,
            b_l: 20,
            b_s: 2000,
            total: 4000,
            lr_a: 0.02,
            lr_l: 0.05,
        }
    }
}

impl AltSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.b_a == 0 || self.b_l == 0 {
            return Err(Error::InvalidArgument("B_a and B_l must be at least 1".into()));
        }
        if self.b_s > self.total {
            return Err(Error::InvalidArgument(format!(
                "B_s = {} exceeds the total of {} steps",
                self.b_s, self.total
            )));
        }
        if !(self.lr_a >= 0.0) || !(self.lr_l >= 0.0) {
            return Err(Error::InvalidArgument("learning rates must be nonnegative".into()));
        }
        Ok(())
    }

    /// Whether 0-based step `t` updates locations.
    pub fn updates_locations(&self, t: usize) -> bool {
        t < self.b_s && t % (self.b_a + self.b_l) >= self.b_a
    }

    pub fn phase(&self, t: usize) -> Phase {
        if t < self.b_s {
            Phase::Alternating
        } else {
            Phase::CoefficientsOnly
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Alternating,
    CoefficientsOnly,
}

impl Phase {
    pub fn tag(self) -> &'static str {
        match self {
            Phase::Alternating => "alternating",
            Phase::CoefficientsOnly => "coefficients_only",
        }
    }
}

/// Loss evaluated before the update of `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub loss: f64,
    pub phase: Phase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerState {
    pub param: LocaParam,
    /// Number of updates applied.
    pub step: usize,
    pub phase: Phase,
    pub losses: Vec<LossRecord>,
    /// Continuous locations at the start of each cycle and at the end.
    pub location_snapshots: Vec<(usize, Vec<(f64, f64)>)>,
    pub final_loss: f64,
}

/// Divergence guard relative to the initial loss.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Runs the alternating schedule from `param`. Location updates are plain
/// gradient steps followed by clamping into the grid.
pub fn train<O: Objective>(
    objective: &O,
    mut param: LocaParam,
    schedule: &AltSchedule,
) -> Result<TrainerState> {
    schedule.validate()?;
    if objective.dims() != param.dims {
        return Err(Error::DimensionMismatch {
            expected: objective.dims(),
            actual: param.dims,
        });
    }
    let basis = param.basis()?;
    let cycle = schedule.b_a + schedule.b_l;
    let mut losses = Vec::with_capacity(schedule.total);
    let mut snapshots = Vec::new();
    let mut guard = f64::INFINITY;
    for t in 0..schedule.total {
        let (loss, upstream) = objective.loss_and_grad(&materialize(&param)?)?;
        if t == 0 {
            guard = DIVERGENCE_FACTOR * loss.max(f64::MIN_POSITIVE);
        }
        if !loss.is_finite() || loss > guard {
            return Err(Error::Diverged { step: t, loss, guard });
        }
        let phase = schedule.phase(t);
        losses.push(LossRecord { step: t, loss, phase });
        if t % cycle == 0 {
            snapshots.push((t, param.l.clone()));
        }
        let z = upstream_to_z(&upstream, &basis)?;
        if schedule.updates_locations(t) {
            let g = location_gradient(&param, &z)?;
            for (l, (g1, g2)) in param.l.iter_mut().zip(g) {
                l.0 -= schedule.lr_l * g1;
                l.1 -= schedule.lr_l * g2;
            }
            param.clamp_locations();
        } else {
            let g = coeff_gradient(&param, &z)?;
            param.a = sgd_step(&param.a, &g, schedule.lr_a)?;
        }
    }
    let (final_loss, _) = objective.loss_and_grad(&materialize(&param)?)?;
    if !final_loss.is_finite() || final_loss > guard {
        return Err(Error::Diverged {
            step: schedule.total,
            loss: final_loss,
            guard,
        });
    }
    snapshots.push((schedule.total, param.l.clone()));
    Ok(TrainerState {
        param,
        step: schedule.total,
        phase: schedule.phase(schedule.total),
        losses,
        location_snapshots: snapshots,
        final_loss,
    })
}

/// Trains a zero-coefficient parameterization of the task's sparse layer
/// from uniformly random locations drawn from `rng`.
pub fn alternating_train(
    task: &super::ToyTaskSpec,
    schedule: &AltSchedule,
    rng: &mut crate::stats::Rng,
) -> Result<TrainerState> {
    let param = LocaParam::zero_init(task.dims(), task.budget(), 1.0, rng)?;
    train(&task.objective(), param, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `L = ‖ΔW − T‖²` for a fixed target.
    struct Quadratic(DenseMatrix);

    impl Objective for Quadratic {
        fn dims(&self) -> (usize, usize) {
            self.0.dims()
        }
        fn loss_and_grad(&self, dw: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
            let r = dw.sub(&self.0)?;
            Ok((r.frobenius_sq(), r.scale(2.0)))
        }
    }

    #[test]
    fn schedule_phases() {
        let s = AltSchedule {
            b_a: 2,
            b_l: 3,
            b_s: 10,
            total: 12,
            lr_a: 0.1,
            lr_l: 0.1,
        };
        let loc: Vec<bool> = (0..12).map(|t| s.updates_locations(t)).collect();
        assert_eq!(
            loc,
            [false, false, true, true, true, false, false, true, true, true, false, false]
        );
        assert_eq!(s.phase(9), Phase::Alternating);
        assert_eq!(s.phase(10), Phase::CoefficientsOnly);
        assert!(AltSchedule { b_s: 20, ..s }.validate().is_err());
        assert!(AltSchedule { b_a: 0, ..s }.validate().is_err());
    }

    #[test]
    fn coefficient_training_on_fixed_locations() {
        let target_param =
            LocaParam::new((6, 6), 1.0, vec![0.8, -0.5], vec![(1.0, 4.0), (5.0, 0.0)]).unwrap();
        let obj = Quadratic(materialize(&target_param).unwrap());
        let start = LocaParam::new((6, 6), 1.0, vec![0.0, 0.0], target_param.l.clone()).unwrap();
        let sched = AltSchedule {
            b_s: 0,
            total: 60,
            lr_a: 0.25,
            ..AltSchedule::default()
        };
        let st = train(&obj, start, &sched).unwrap();
        assert!(st.final_loss < 1e-12);
        assert!(st.losses.windows(2).all(|w| w[1].loss <= w[0].loss));
        assert_eq!(st.phase, Phase::CoefficientsOnly);
    }

    #[test]
    fn divergence_is_reported() {
        let target = LocaParam::new((4, 4), 1.0, vec![1.0], vec![(1.0, 1.0)]).unwrap();
        let obj = Quadratic(materialize(&target).unwrap());
        let start = LocaParam::new((4, 4), 1.0, vec![0.0], vec![(1.0, 1.0)]).unwrap();
        let sched = AltSchedule {
            b_s: 0,
            total: 100,
            lr_a: 5.0,
            ..AltSchedule::default()
        };
        assert!(matches!(train(&obj, start, &sched), Err(Error::Diverged { .. })));
    }

    #[test]
    fn locations_stay_in_grid() {
        let target = LocaParam::new((5, 5), 1.0, vec![2.0], vec![(4.0, 4.0)]).unwrap();
        let obj = Quadratic(materialize(&target).unwrap());
        let start = LocaParam::new((5, 5), 1.0, vec![0.0], vec![(0.0, 0.0)]).unwrap();
        let sched = AltSchedule {
            b_a: 2,
            b_l: 2,
            b_s: 200,
            total: 300,
            lr_a: 0.2,
            lr_l: 5.0,
        };
        let st = train(&obj, start, &sched).unwrap();
        for (_, snap) in &st.location_snapshots {
            for &(x, y) in snap {
                assert!((0.0..=4.0).contains(&x) && (0.0..=4.0).contains(&y));
            }
        }
    }
}
