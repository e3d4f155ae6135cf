//! Random-matrix diagnostics: empirical spectral density against the
//! Marchenko–Pastur support, a total-variation normality test, and the
//! order-statistic tools used to bracket spectral selection energies.

use rand::{Rng as _, RngCore};
use rand_distr::{ChiSquared, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::stats::{gaussian_matrix, run_trials, Rng, RunningStats};

/// Spectrum of `(1/p)·WᵀW` with its fitted Marchenko–Pastur support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsdReport {
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Aspect ratio `p/q`.
    pub q_ratio: f64,
    pub sigma_mp: f64,
    pub mp_lower: f64,
    pub mp_upper: f64,
    pub outside_mass: f64,
}

/// Population standard deviation of the entries about their mean.
pub fn entry_std(w: &DenseMatrix) -> f64 {
    let n = w.as_slice().len() as f64;
    let mean = w.sum() / n;
    (w.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Eigenvalues of `(1/p)·WᵀW` for a p×q matrix with `p >= q >= 2`, with the
/// MP support fitted from the entrywise standard deviation.
pub fn esd(w: &DenseMatrix) -> Result<EsdReport> {
    let (p, q) = w.dims();
    if q < 2 || p < q {
        return Err(Error::Degenerate(format!(
            "spectral density needs p >= q >= 2, got {p}x{q}"
        )));
    }
    let gram = w.transposed_matmul(w)?.scale(1.0 / p as f64);
    let eigenvalues: Vec<f64> = linalg::symmetric_eigenvalues(&gram)?
        .into_iter()
        .map(|e| e.max(0.0))
        .collect();
    let sigma = entry_std(w);
    if sigma <= 0.0 {
        return Err(Error::Degenerate("matrix has zero entry variance".into()));
    }
    let q_ratio = p as f64 / q as f64;
    let (mp_lower, mp_upper) = mp_bounds(q_ratio, sigma)?;
    let outside_mass = mp_outside_mass(&eigenvalues, (mp_lower, mp_upper))?;
    Ok(EsdReport {
        eigenvalues,
        q_ratio,
        sigma_mp: sigma,
        mp_lower,
        mp_upper,
        outside_mass,
    })
}

/// Support `σ²(1 ∓ 1/√Q)²` of the MP law for aspect ratio `Q >= 1`.
pub fn mp_bounds(q_ratio: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(q_ratio >= 1.0) || !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "MP bounds need Q >= 1 and sigma > 0, got Q={q_ratio}, sigma={sigma}"
        )));
    }
    let s2 = sigma * sigma;
    let r = 1.0 / q_ratio.sqrt();
    Ok((s2 * (1.0 - r).powi(2), s2 * (1.0 + r).powi(2)))
}

/// Fraction of eigenvalue mass outside `[lower, upper]`.
pub fn mp_outside_mass(eigs: &[f64], (lower, upper): (f64, f64)) -> Result<f64> {
    let total: f64 = eigs.iter().sum();
    if eigs.is_empty() || total <= 0.0 {
        return Err(Error::Degenerate("eigenvalues sum to zero".into()));
    }
    let outside: f64 = eigs.iter().filter(|&&l| l < lower || l > upper).sum();
    Ok((outside / total).clamp(0.0, 1.0))
}

/// Equal-width bins over `μ ± 6σ` plus one overflow bin on each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Binning {
    pub mu: f64,
    pub sigma: f64,
    pub bins: usize,
}

impl Binning {
    pub fn new(mu: f64, sigma: f64, bins: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::Degenerate(format!("binning needs sigma > 0, got {sigma}")));
        }
        if bins == 0 {
            return Err(Error::InvalidArgument("binning needs at least one bin".into()));
        }
        Ok(Self { mu, sigma, bins })
    }

    fn lo(&self) -> f64 {
        self.mu - 6.0 * self.sigma
    }

    fn width(&self) -> f64 {
        12.0 * self.sigma / self.bins as f64
    }

    /// Index into `[underflow, bin 0 .. bin bins-1, overflow]`.
    pub fn index(&self, x: f64) -> usize {
        let t = (x - self.lo()) / self.width();
        if t < 0.0 {
            0
        } else if t >= self.bins as f64 {
            self.bins + 1
        } else {
            t as usize + 1
        }
    }

    pub fn counts(&self, samples: impl IntoIterator<Item = f64>) -> Vec<u64> {
        let mut counts = vec![0u64; self.bins + 2];
        for x in samples {
            counts[self.index(x)] += 1;
        }
        counts
    }

    /// Probability mass of `N(μ, σ²)` in each bin.
    pub fn gaussian_masses(&self) -> Vec<f64> {
        let cdf = |x: f64| 0.5 * libm::erfc(-(x - self.mu) / (self.sigma * std::f64::consts::SQRT_2));
        let mut edges: Vec<f64> = (0..=self.bins)
            .map(|k| cdf(self.lo() + k as f64 * self.width()))
            .collect();
        edges.insert(0, 0.0);
        edges.push(1.0);
        edges.windows(2).map(|e| e[1] - e[0]).collect()
    }
}

fn normalize(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// `½·Σ|a − b|` between two probability vectors on the same bins.
pub fn tv_between(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Binned total-variation distance between the samples' empirical
/// distribution and `N(μ, σ²)`.
pub fn tv_distance(samples: &[f64], mu: f64, sigma: f64, bins: usize) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("TV distance needs at least two samples".into()));
    }
    let b = Binning::new(mu, sigma, bins)?;
    let emp = normalize(&b.counts(samples.iter().copied()));
    Ok(tv_between(&emp, &b.gaussian_masses()).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityConfig {
    pub reference_size: usize,
    pub sigma_e: f64,
    pub accepted: usize,
    pub sets_per_distribution: usize,
    /// Defaults to the number of tested entries.
    pub set_size: Option<usize>,
    pub epsilon: f64,
    pub significance: f64,
    pub bins: usize,
    pub max_attempts: usize,
}

impl Default for NormalityConfig {
    fn default() -> Self {
        Self {
            reference_size: 100_000,
            sigma_e: 1e-5,
            accepted: 100,
            sets_per_distribution: 10,
            set_size: None,
            epsilon: 1e-3,
            significance: 0.05,
            bins: 12,
            max_attempts: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityTestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub epsilon: f64,
    pub rejected: bool,
    pub attempts: usize,
    pub null_samples: Vec<f64>,
}

/// Perturbation-bootstrap test of whether the entries of `w` are Gaussian.
///
/// A reference set `G` is drawn from `N(μ̂, σ̂²)`. Copies of `G` jittered by
/// `N(0, σ_e²)` are kept when their TV distance to `G` is below `epsilon`.
/// Sets of `p·q` points resampled (with replacement) from each kept copy
/// give the null distribution of the TV distance to `G`; the p-value is the
/// fraction of null draws at least as large as the observed distance.
pub fn normality_test(
    w: &DenseMatrix,
    epsilon: f64,
    config: &NormalityConfig,
    rng: &mut Rng,
) -> Result<NormalityTestReport> {
    let entries = w.as_slice();
    let n = entries.len() as f64;
    let mu = entries.iter().sum::<f64>() / n;
    let var = entries.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sigma = var.sqrt();
    if !(sigma > 1e-300) {
        return Err(Error::Degenerate("entries have zero variance".into()));
    }
    if config.reference_size < 2 || config.accepted == 0 || config.sets_per_distribution == 0 {
        return Err(Error::InvalidArgument("normality test sizes must be positive".into()));
    }
    let binning = Binning::new(mu, sigma, config.bins)?;
    let gauss = Normal::new(mu, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let reference: Vec<f64> = (0..config.reference_size).map(|_| gauss.sample(rng)).collect();
    let ref_mass = normalize(&binning.counts(reference.iter().copied()));
    let set_size = config.set_size.unwrap_or(entries.len());

    let mut null_samples = Vec::with_capacity(config.accepted * config.sets_per_distribution);
    let mut kept = 0;
    let mut attempts = 0;
    let mut perturbed = vec![0.0; reference.len()];
    while kept < config.accepted {
        if attempts == config.max_attempts {
            return Err(Error::Numerical(format!(
                "accepted only {kept} of {} perturbed distributions in {attempts} attempts",
                config.accepted
            )));
        }
        attempts += 1;
        for (dst, &g) in perturbed.iter_mut().zip(&reference) {
            let e: f64 = StandardNormal.sample(rng);
            *dst = g + config.sigma_e * e;
        }
        let mass = normalize(&binning.counts(perturbed.iter().copied()));
        if tv_between(&mass, &ref_mass) >= epsilon {
            continue;
        }
        kept += 1;
        for _ in 0..config.sets_per_distribution {
            let set = (0..set_size).map(|_| perturbed[rng.random_range(0..perturbed.len())]);
            let m = normalize(&binning.counts(set));
            null_samples.push(tv_between(&m, &ref_mass));
        }
    }
    let statistic = tv_between(&normalize(&binning.counts(entries.iter().copied())), &ref_mass);
    let at_least = null_samples.iter().filter(|&&t| t >= statistic).count();
    let p_value = at_least as f64 / null_samples.len() as f64;
    Ok(NormalityTestReport {
        statistic,
        p_value,
        epsilon,
        rejected: p_value < config.significance,
        attempts,
        null_samples,
    })
}

/// Monte Carlo mean and standard error of the sum of the `top_n` largest
/// draws from a mixed chi-square ensemble given as `(count, dof)` groups.
pub fn chi_square_order_sum(
    dof_pattern: &[(usize, f64)],
    top_n: usize,
    trials: usize,
    rng: &mut Rng,
) -> Result<(f64, f64)> {
    let total: usize = dof_pattern.iter().map(|g| g.0).sum();
    if top_n > total {
        return Err(Error::BudgetTooLarge {
            requested: top_n,
            available: total,
            what: "chi-square draws",
        });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let dists = dof_pattern
        .iter()
        .map(|&(count, dof)| {
            ChiSquared::new(dof)
                .map(|d| (count, d))
                .map_err(|e| Error::InvalidArgument(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let master = rng.next_u64();
    let sums = run_trials(master, &[], trials, |_, rng| {
        if top_n == 0 {
            return 0.0;
        }
        let mut draws = Vec::with_capacity(total);
        for (count, d) in &dists {
            draws.extend((0..*count).map(|_| d.sample(rng)));
        }
        draws.select_nth_unstable_by(top_n - 1, |a, b| b.total_cmp(a));
        draws[..top_n].iter().sum()
    });
    let s: RunningStats = sums.into_iter().collect();
    Ok((s.mean, s.stderr().unwrap_or(0.0)))
}

/// Upper bound `μ + σ·sqrt((n − l)/l)` on the expected `l`-th largest of `n`
/// draws with mean `μ` and standard deviation `σ`.
pub fn order_stat_upper_bound(mu: f64, sigma: f64, n: usize, l: usize) -> Result<f64> {
    if l == 0 || l > n {
        return Err(Error::InvalidArgument(format!("order index {l} outside 1..={n}")));
    }
    Ok(mu + sigma * ((n - l) as f64 / l as f64).sqrt())
}

/// Monte Carlo mean and standard error of `λ₁(WᵀW)/K` over standard
/// Gaussian K×K matrices.
pub fn wishart_lmax_ratio(k: usize, trials: usize, rng: &mut Rng) -> Result<(f64, f64)> {
    if k < 16 {
        return Err(Error::InvalidArgument(format!("K must be at least 16, got {k}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let master = rng.next_u64();
    let ratios = run_trials(master, &[k as u64], trials, |_, rng| {
        let w = gaussian_matrix(k, k, 1.0, rng);
        let s1 = linalg::singular_values(&w)[0];
        s1 * s1 / k as f64
    });
    let s: RunningStats = ratios.into_iter().collect();
    Ok((s.mean, s.stderr().unwrap_or(0.0)))
}
