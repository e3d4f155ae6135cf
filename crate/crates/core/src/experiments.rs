//! Monte Carlo harness comparing the approximators on Gaussian matrices.
//!
//! Every trial draws its matrix from a substream seeded by
//! `derive_seed(master, [experiment tag, grid coordinates.., trial])`, and
//! results are reduced in trial order, so reports do not depend on the
//! number of worker threads.

use serde::{Deserialize, Serialize};

use crate::approx::{
    dct_tail_energy, expected_random_selection, ApproximationReport, BudgetSpec, Method,
    SpectrumAnalysis,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::rmt::{self, chi_square_order_sum};
use crate::stats::{derive_seed, gaussian_matrix, rng_from_seed, run_trials, Rng, RunningStats};
use crate::transforms::{dct2, DctBasis};

const TAG_THEOREM1: u64 = 1;
const TAG_THEOREM2: u64 = 2;
const TAG_NONIID: u64 = 3;
const TAG_MP: u64 = 4;
const TAG_BRACKET: u64 = 5;
const TAG_RANDOM: u64 = 6;

/// Grid and trial settings shared by the sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k_values: Vec<usize>,
    pub r_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub rho_grid: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_values: vec![100, 150, 200],
            r_values: vec![8, 16],
            trials: 200,
            seed: 0,
            rho_grid: rho_grid(0.0, 0.3, 0.01),
        }
    }
}

/// Inclusive grid `start, start + step, ..` up to `stop`, rounded to
/// suppress accumulation drift.
pub fn rho_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

/// Outcome of comparing a chain of means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Fewer than two trials, so no standard error is available.
    Indeterminate,
}

/// Means `a > b` separated by at least two combined standard errors.
pub fn separated(a: &ApproximationReport, b: &ApproximationReport) -> Verdict {
    match (a.stderr, b.stderr) {
        (Some(sa), Some(sb)) => {
            if a.mean - b.mean >= 2.0 * (sa * sa + sb * sb).sqrt() {
                Verdict::Holds
            } else {
                Verdict::Fails
            }
        }
        _ => Verdict::Indeterminate,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_ratio: f64,
    pub stderr_ratio: Option<f64>,
}

/// One (K, r) cell of the four-way comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    pub k: usize,
    pub r: usize,
    pub trials: usize,
    pub budget: BudgetSpec,
    /// Random Fourier, low-rank, top-amplitude Fourier, top-coefficient
    /// Fourier, then top DCT; ratios are errors over K².
    pub summaries: Vec<MethodSummary>,
    #[serde(skip)]
    pub reports: Vec<ApproximationReport>,
    /// Verdicts for the three adjacent pairs of the chain
    /// random > low-rank > top-amplitude > top-coefficient.
    pub pair_verdicts: Vec<Verdict>,
    pub verdict: Verdict,
}

impl OrderingResult {
    pub fn report(&self, method: Method) -> &ApproximationReport {
        self.reports
            .iter()
            .find(|r| r.method == method)
            .expect("every method is reported")
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Per-trial errors of all five methods on one K×K Gaussian matrix.
fn theorem1_trial(k: usize, budget: &BudgetSpec, rng: &mut Rng) -> Result<[f64; 5]> {
    let w = gaussian_matrix(k, k, 1.0, rng);
    let sv = linalg::singular_values(&w);
    let l_r = sv[budget.r..].iter().map(|s| s * s).sum();
    let a = SpectrumAnalysis::new(&w)?;
    let random = a.cells_error(&a.random_cells(budget.n1, rng)?);
    let amp = a.cells_error(&a.top_amplitude_cells(budget.n2)?);
    let coeff = a.slots_error(&a.top_coeff_slots(budget.n3)?);
    let dct = crate::approx::dct_top_error(&w, budget.nd)?;
    Ok([random, l_r, amp, coeff, dct])
}

/// Monte Carlo comparison of the four approximators at one (K, r) cell.
/// Requires `3r < K`.
pub fn run_theorem1_cell(k: usize, r: usize, trials: usize, seed: u64) -> Result<OrderingResult> {
    check_trials(trials)?;
    if r == 0 || 3 * r >= k {
        return Err(Error::InvalidArgument(format!(
            "rank r={r} must satisfy 0 < r < K/3 for K={k}"
        )));
    }
    let budget = BudgetSpec::new(k, k, r)?;
    let rows = run_trials(seed, &[TAG_THEOREM1, k as u64, r as u64], trials, |_, rng| {
        theorem1_trial(k, &budget, rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let order = [
        Method::FourierRandom,
        Method::LowRank,
        Method::FourierTopAmplitude,
        Method::FourierTopCoeff,
        Method::DctTop,
    ];
    let k2 = (k * k) as f64;
    let mut reports = Vec::with_capacity(order.len());
    let mut summaries = Vec::with_capacity(order.len());
    for (col, &method) in order.iter().enumerate() {
        let errs: Vec<f64> = rows.iter().map(|row| row[col]).collect();
        let rep = ApproximationReport::from_errors(method, k, r, errs)?;
        summaries.push(MethodSummary {
            method,
            mean_ratio: rep.mean / k2,
            stderr_ratio: rep.stderr.map(|s| s / k2),
        });
        reports.push(rep);
    }
    let pair_verdicts: Vec<Verdict> = (0..3).map(|i| separated(&reports[i], &reports[i + 1])).collect();
    let verdict = if pair_verdicts.contains(&Verdict::Indeterminate) {
        Verdict::Indeterminate
    } else if pair_verdicts.iter().all(|&v| v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(OrderingResult {
        k,
        r,
        trials,
        budget,
        summaries,
        reports,
        pair_verdicts,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Result {
    pub k: usize,
    pub budget: usize,
    pub trials: usize,
    pub mean_fourier_coeff: f64,
    pub stderr_fourier_coeff: f64,
    pub mean_dct: f64,
    pub stderr_dct: f64,
    /// `|mean_F3 − mean_D| / mean_D`, zero when both means vanish.
    pub relative_gap: f64,
    pub gap_stderr: f64,
}

/// Compares top-`n` coefficient selection in the DFT and DCT domains on the
/// same Gaussian matrices.
pub fn run_theorem2_check(k: usize, n: usize, trials: usize, seed: u64) -> Result<Theorem2Result> {
    check_trials(trials)?;
    if n > k * k {
        return Err(Error::BudgetTooLarge {
            requested: n,
            available: k * k,
            what: "coefficients",
        });
    }
    let rows = run_trials(seed, &[TAG_THEOREM2, k as u64, n as u64], trials, |_, rng| {
        let w = gaussian_matrix(k, k, 1.0, rng);
        let a = SpectrumAnalysis::new(&w)?;
        let f3 = a.slots_error(&a.top_coeff_slots(n)?);
        let d = crate::approx::dct_top_error(&w, n)?;
        Ok::<_, Error>((f3, d))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let f3: RunningStats = rows.iter().map(|r| r.0).collect();
    let d: RunningStats = rows.iter().map(|r| r.1).collect();
    let (se_f3, se_d) = (f3.stderr().unwrap_or(0.0), d.stderr().unwrap_or(0.0));
    let (relative_gap, gap_stderr) = if d.mean <= 0.0 {
        (0.0, 0.0)
    } else {
        (
            (f3.mean - d.mean).abs() / d.mean,
            (se_f3 * se_f3 + se_d * se_d).sqrt() / d.mean,
        )
    };
    Ok(Theorem2Result {
        k,
        budget: n,
        trials,
        mean_fourier_coeff: f3.mean,
        stderr_fourier_coeff: se_f3,
        mean_dct: d.mean,
        stderr_dct: se_d,
        relative_gap,
        gap_stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSelectionResult {
    pub k: usize,
    pub r: usize,
    pub trials: usize,
    pub mean_retained: f64,
    pub stderr_retained: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

/// Monte Carlo energy `K² − L` kept by `N1` random retained cells against
/// its closed form.
pub fn run_random_selection_check(
    k: usize,
    r: usize,
    trials: usize,
    seed: u64,
) -> Result<RandomSelectionResult> {
    check_trials(trials)?;
    let budget = BudgetSpec::new(k, k, r)?;
    let k2 = (k * k) as f64;
    let kept = run_trials(seed, &[TAG_RANDOM, k as u64, r as u64], trials, |_, rng| {
        let w = gaussian_matrix(k, k, 1.0, rng);
        let a = SpectrumAnalysis::new(&w)?;
        Ok::<_, Error>(k2 - a.cells_error(&a.random_cells(budget.n1, rng)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let s: RunningStats = kept.into_iter().collect();
    let closed_form = expected_random_selection(k, r)?;
    Ok(RandomSelectionResult {
        k,
        r,
        trials,
        mean_retained: s.mean,
        stderr_retained: s.stderr().unwrap_or(0.0),
        closed_form,
        relative_error: (s.mean - closed_form).abs() / closed_form,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketResult {
    pub k: usize,
    pub r: usize,
    pub n2: usize,
    pub trials: usize,
    pub observed: f64,
    pub observed_stderr: f64,
    pub m1: f64,
    pub m1_stderr: f64,
    pub m2: f64,
    pub m2_stderr: f64,
    /// `m1 − 2se ≤ observed ≤ m2 + 2se` with combined standard errors.
    pub within: bool,
}

/// Energy kept by top-amplitude selection against the chi-square order
/// sums that bound it from below (`K²/2 − 2` cells of χ²₂) and above
/// (`K²/2 + 2` cells of χ²₂). `k` must be even.
pub fn run_bracket_check(k: usize, r: usize, trials: usize, seed: u64) -> Result<BracketResult> {
    check_trials(trials)?;
    if k % 2 != 0 || k < 4 {
        return Err(Error::InvalidArgument(format!("bracket needs even K >= 4, got {k}")));
    }
    let budget = BudgetSpec::new(k, k, r)?;
    let k2 = (k * k) as f64;
    let kept = run_trials(seed, &[TAG_BRACKET, k as u64, r as u64], trials, |_, rng| {
        let w = gaussian_matrix(k, k, 1.0, rng);
        let a = SpectrumAnalysis::new(&w)?;
        Ok::<_, Error>(k2 - a.cells_error(&a.top_amplitude_cells(budget.n2)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let obs: RunningStats = kept.into_iter().collect();
    let mut rng = rng_from_seed(derive_seed(seed, &[TAG_BRACKET, k as u64, r as u64, u64::MAX]));
    let half = k * k / 2;
    let (m1, m1_se) = chi_square_order_sum(&[(half - 2, 2.0)], budget.n2, trials, &mut rng)?;
    let (m2, m2_se) = chi_square_order_sum(&[(half + 2, 2.0)], budget.n2, trials, &mut rng)?;
    let obs_se = obs.stderr().unwrap_or(0.0);
    let within = obs.mean >= m1 - 2.0 * (obs_se.powi(2) + m1_se.powi(2)).sqrt()
        && obs.mean <= m2 + 2.0 * (obs_se.powi(2) + m2_se.powi(2)).sqrt();
    Ok(BracketResult {
        k,
        r,
        n2: budget.n2,
        trials,
        observed: obs.mean,
        observed_stderr: obs_se,
        m1,
        m1_stderr: m1_se,
        m2,
        m2_stderr: m2_se,
        within,
    })
}

/// K×K matrix whose vectorized entries follow `N(0, ρ·11ᵀ + I)`: a single
/// shared `√ρ·z` offset plus independent standard normal noise.
pub fn sample_correlated_matrix(k: usize, rho: f64, rng: &mut Rng) -> Result<DenseMatrix> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("rho must be nonnegative, got {rho}")));
    }
    let g = gaussian_matrix(k, k, 1.0, rng);
    let z = gaussian_matrix(1, 1, 1.0, rng)[(0, 0)];
    Ok(g.map(|v| v + rho.sqrt() * z))
}

/// Where the low-rank error curve first drops below the DCT reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rho", rename_all = "snake_case")]
pub enum Crossing {
    At(f64),
    AboveGrid,
}

impl Crossing {
    pub fn value(self) -> Option<f64> {
        match self {
            Crossing::At(r) => Some(r),
            Crossing::AboveGrid => None,
        }
    }
}

/// First zero crossing of `diff` (positive to nonpositive) on the grid, by
/// linear interpolation between neighbouring points.
pub fn interpolate_crossing(grid: &[f64], diff: &[f64]) -> Crossing {
    for i in 0..diff.len() {
        if diff[i] < 0.0 {
            if i == 0 {
                return Crossing::At(grid[0]);
            }
            let (d0, d1) = (diff[i - 1], diff[i]);
            let t = d0 / (d0 - d1);
            return Crossing::At(grid[i - 1] + t * (grid[i] - grid[i - 1]));
        }
    }
    Crossing::AboveGrid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoniidPoint {
    pub rho: f64,
    pub r: usize,
    /// `E[L_R] / E‖W‖²` on correlated matrices, where
    /// `E‖W‖² = K²(1 + ρ)`.
    pub lowrank_rel: f64,
    pub lowrank_rel_stderr: f64,
    /// `E[L_D] / E‖W‖²` of top-DCT selection on the same correlated
    /// matrices.
    pub dct_rel: f64,
    pub dct_rel_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoniidRankResult {
    pub r: usize,
    /// `E[L_D] / K²` on the uncorrelated component of each trial.
    pub iid_dct_rel: f64,
    pub iid_dct_rel_stderr: f64,
    /// Crossing of the low-rank curve with the i.i.d. DCT reference.
    pub critical_rho: Crossing,
    /// Crossing of the low-rank curve with top-DCT on the same correlated
    /// matrices.
    pub same_matrix_critical_rho: Crossing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoniidSweep {
    pub k: usize,
    pub trials: usize,
    pub rho_grid: Vec<f64>,
    pub points: Vec<NoniidPoint>,
    pub ranks: Vec<NoniidRankResult>,
}

/// Low-rank versus top-DCT reconstruction as the uniform correlation `ρ`
/// grows.
///
/// Trial `t` draws one noise matrix `G` and one shared offset `z`, then
/// evaluates `W_ρ = G + √ρ·z·11ᵀ` at every grid point, so all curves share
/// common random numbers. Top-DCT selection is budgeted with `N_D` for rank
/// `r`; its relative error on `G` is the i.i.d. reference the low-rank curve
/// is compared against. Errors are normalized by the expected energy
/// `K²(1 + ρ)`, the correlated counterpart of the `K²` used for i.i.d.
/// matrices.
pub fn run_noniid_sweep(
    k: usize,
    r_values: &[usize],
    grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<NoniidSweep> {
    check_trials(trials)?;
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "rho grid must be nonempty, nonnegative and strictly ascending".into(),
        ));
    }
    let budgets = r_values
        .iter()
        .map(|&r| BudgetSpec::new(k, k, r))
        .collect::<Result<Vec<_>>>()?;
    let basis = DctBasis::shared(k, k)?;
    let nr = r_values.len();

    // Per trial: iid dct rel per r, then per rho: (lowrank rel, dct rel) per r.
    type TrialOut = (Vec<f64>, Vec<Vec<(f64, f64)>>);
    let outs = run_trials(seed, &[TAG_NONIID, k as u64], trials, |_, rng| -> Result<TrialOut> {
        let g = gaussian_matrix(k, k, 1.0, rng);
        let z = gaussian_matrix(1, 1, 1.0, rng)[(0, 0)];
        let f = dct2(&g, &basis)?;
        let k2 = (k * k) as f64;
        let iid: Vec<f64> = budgets
            .iter()
            .map(|b| -> Result<f64> { Ok(dct_tail_energy(&f, b.nd)? / k2) })
            .collect::<Result<_>>()?;
        let mut per_rho = Vec::with_capacity(grid.len());
        for &rho in grid {
            let shift = rho.sqrt() * z;
            let w = g.map(|v| v + shift);
            let energy = k2 * (1.0 + rho);
            let sv = linalg::singular_values(&w);
            // A constant offset only moves the DC coefficient of the DCT.
            let mut fw = f.clone();
            fw[(0, 0)] += shift * k as f64;
            let mut row = Vec::with_capacity(nr);
            for b in &budgets {
                let l_r: f64 = sv[b.r..].iter().map(|s| s * s).sum();
                row.push((l_r / energy, dct_tail_energy(&fw, b.nd)? / energy));
            }
            per_rho.push(row);
        }
        Ok((iid, per_rho))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(grid.len() * nr);
    let mut ranks = Vec::with_capacity(nr);
    for (ri, &r) in r_values.iter().enumerate() {
        let iid: RunningStats = outs.iter().map(|o| o.0[ri]).collect();
        let mut diff_ref = Vec::with_capacity(grid.len());
        let mut diff_same = Vec::with_capacity(grid.len());
        for (gi, &rho) in grid.iter().enumerate() {
            let lr: RunningStats = outs.iter().map(|o| o.1[gi][ri].0).collect();
            let d: RunningStats = outs.iter().map(|o| o.1[gi][ri].1).collect();
            diff_ref.push(lr.mean - iid.mean);
            diff_same.push(lr.mean - d.mean);
            points.push(NoniidPoint {
                rho,
                r,
                lowrank_rel: lr.mean,
                lowrank_rel_stderr: lr.stderr().unwrap_or(0.0),
                dct_rel: d.mean,
                dct_rel_stderr: d.stderr().unwrap_or(0.0),
            });
        }
        ranks.push(NoniidRankResult {
            r,
            iid_dct_rel: iid.mean,
            iid_dct_rel_stderr: iid.stderr().unwrap_or(0.0),
            critical_rho: interpolate_crossing(grid, &diff_ref),
            same_matrix_critical_rho: interpolate_crossing(grid, &diff_same),
        });
    }
    Ok(NoniidSweep {
        k,
        trials,
        rho_grid: grid.to_vec(),
        points,
        ranks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpDiagnostic {
    pub k: usize,
    pub rho: f64,
    pub matrices: usize,
    pub mean_outside_mass: f64,
    pub stderr_outside_mass: f64,
    pub outside_masses: Vec<f64>,
}

/// Mean MP outside-mass statistic over `matrices` correlated K×K draws.
/// `stream` separates independent repetitions under one master seed.
pub fn run_mp_diagnostic(
    k: usize,
    rho: f64,
    matrices: usize,
    seed: u64,
    stream: u64,
) -> Result<MpDiagnostic> {
    check_trials(matrices)?;
    let rho_key = (rho * 1e9).round() as u64;
    let outside_masses = run_trials(seed, &[TAG_MP, k as u64, rho_key, stream], matrices, |_, rng| {
        let w = sample_correlated_matrix(k, rho, rng)?;
        Ok::<_, Error>(rmt::esd(&w)?.outside_mass)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let s: RunningStats = outside_masses.iter().copied().collect();
    Ok(MpDiagnostic {
        k,
        rho,
        matrices,
        mean_outside_mass: s.mean,
        stderr_outside_mass: s.stderr().unwrap_or(0.0),
        outside_masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_clean() {
        let g = rho_grid(0.0, 0.3, 0.01);
        assert_eq!(g.len(), 31);
        assert_eq!(g[9], 0.09);
        assert_eq!(*g.last().unwrap(), 0.3);
    }

    #[test]
    fn crossing_interpolation() {
        let grid = [0.0, 0.1, 0.2];
        assert_eq!(interpolate_crossing(&grid, &[1.0, 1.0, 1.0]), Crossing::AboveGrid);
        assert_eq!(interpolate_crossing(&grid, &[-1.0, 1.0, 1.0]), Crossing::At(0.0));
        match interpolate_crossing(&grid, &[3.0, 1.0, -1.0]) {
            Crossing::At(r) => assert!((r - 0.15).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn theorem1_rejects_large_rank() {
        assert!(run_theorem1_cell(100, 40, 10, 0).is_err());
        assert!(run_theorem1_cell(30, 10, 10, 0).is_err());
    }

    #[test]
    fn single_trial_is_indeterminate() {
        let res = run_theorem1_cell(24, 2, 1, 3).unwrap();
        assert_eq!(res.verdict, Verdict::Indeterminate);
        assert!(res.pair_verdicts.iter().all(|&v| v == Verdict::Indeterminate));
    }

    #[test]
    fn small_cell_is_deterministic() {
        let a = run_theorem1_cell(24, 2, 8, 42).unwrap();
        let b = run_theorem1_cell(24, 2, 8, 42).unwrap();
        assert_eq!(a.summaries, b.summaries);
        for s in &a.summaries {
            assert!(s.mean_ratio > 0.0 && s.mean_ratio < 1.0);
        }
    }

    #[test]
    fn theorem2_edges() {
        let full = run_theorem2_check(8, 64, 5, 1).unwrap();
        assert_eq!(full.relative_gap, 0.0);
        let none = run_theorem2_check(8, 0, 50, 1).unwrap();
        assert!(none.relative_gap <= none.gap_stderr + 1e-12);
        assert!((none.mean_dct / 64.0 - 1.0).abs() < 0.1);
        assert!(run_theorem2_check(8, 65, 5, 1).is_err());
    }

    #[test]
    fn correlated_sampler() {
        let mut rng = rng_from_seed(3);
        assert!(sample_correlated_matrix(4, -0.1, &mut rng).is_err());
        let w = sample_correlated_matrix(64, 0.0, &mut rng).unwrap();
        let n = 64.0 * 64.0;
        let mean = w.sum() / n;
        let var = w.map(|v| (v - mean) * (v - mean)).sum() / n;
        assert!((var - 1.0).abs() < 0.1);
        // Lag-one correlation along rows stays near zero.
        let mut c = 0.0;
        for i in 0..64 {
            for j in 0..63 {
                c += (w[(i, j)] - mean) * (w[(i, j + 1)] - mean);
            }
        }
        assert!((c / (64.0 * 63.0) / var).abs() < 0.05);
    }

    #[test]
    fn correlated_variance_is_one_plus_rho() {
        // Entry variance across independent matrices, one entry each.
        let rho = 0.5;
        let draws: Vec<f64> = run_trials(9, &[], 4000, |_, rng| {
            sample_correlated_matrix(2, rho, rng).unwrap()[(0, 1)]
        });
        let s: RunningStats = draws.into_iter().collect();
        let v = s.variance().unwrap();
        // Standard error of a normal sample variance is v·sqrt(2/(n−1)).
        assert!((v - 1.5).abs() < 3.0 * 1.5 * (2.0 / 3999.0f64).sqrt(), "{v}");
    }

    #[test]
    fn noniid_small_sweep_shapes() {
        let grid = rho_grid(0.0, 0.2, 0.1);
        let s = run_noniid_sweep(24, &[1, 2], &grid, 6, 5).unwrap();
        assert_eq!(s.points.len(), 6);
        assert_eq!(s.ranks.len(), 2);
        assert!(run_noniid_sweep(24, &[1], &[0.2, 0.1], 2, 5).is_err());
    }
}
