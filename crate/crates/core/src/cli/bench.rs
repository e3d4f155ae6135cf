//! Wall time of three inverse DCT paths on random sparse spectra.

use std::time::Instant;

use rand::Rng as _;
use serde_json::json;

use super::report::{num, Report, Table};
use super::{CliError, RunConfig};
use crate::stats::{derive_seed, rng_from_seed, Rng};
use crate::transforms::{fast_idct2, idct2_dense, idct2_sparse, scatter, DctBasis, SparseSpectrum};
use crate::DenseMatrix;

const TAG_BENCH: u64 = 23;
/// Sparse runs above this many multiply-adds are skipped.
const SPARSE_FLOP_CAP: f64 = 2e9;
/// All paths must agree to this absolute tolerance.
const AGREEMENT_TOL: f64 = 1e-8;

/// `budget` distinct uniformly drawn cells with coefficients in (−1, 1).
fn random_spectrum(dims: (usize, usize), budget: usize, rng: &mut Rng) -> SparseSpectrum {
    let cells = rand::seq::index::sample(rng, dims.0 * dims.1, budget).into_vec();
    SparseSpectrum {
        dims,
        coefficients: (0..budget).map(|_| rng.random_range(-1.0..1.0)).collect(),
        locations: cells.into_iter().map(|c| (c / dims.1, c % dims.1)).collect(),
    }
}

/// Best wall time over `repeats` runs and the last output.
fn time<F: FnMut() -> crate::Result<DenseMatrix>>(repeats: usize, mut f: F) -> crate::Result<(f64, DenseMatrix)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let m = f()?;
        best = best.min(t.elapsed().as_secs_f64());
        out = Some(m);
    }
    Ok((best, out.expect("at least one repeat")))
}

pub fn bench(c: &RunConfig) -> Result<Report, CliError> {
    let sizes = c.k.clone().unwrap_or(vec![64, 256, 1024]);
    let budgets = c.budget.clone().unwrap_or(vec![10, 100, 1000]);
    let repeats = c.trials.unwrap_or(3);
    if sizes.contains(&0) {
        return Err(CliError::Config("sizes must be positive".into()));
    }
    let mut table = Table::new(
        "bench.csv",
        &["p", "q", "budget", "path", "seconds", "max_abs_dev"],
    );
    let mut cells = Vec::new();
    let mut summary = Vec::new();
    let mut agree = true;
    for &k in &sizes {
        let basis = DctBasis::shared(k, k)?;
        let pq = k * k;
        let mut grid: Vec<usize> = budgets.iter().copied().filter(|&b| b > 0 && b < pq).collect();
        grid.push(pq);
        for b in grid {
            let mut rng = rng_from_seed(derive_seed(c.seed, &[TAG_BENCH, k as u64, b as u64]));
            let spec = random_spectrum((k, k), b, &mut rng);
            let (t_dense, dense) = time(repeats, || {
                idct2_dense(&scatter(&spec.coefficients, &spec.locations, spec.dims)?, &basis)
            })?;
            let (t_fast, fast) = time(repeats, || {
                Ok(fast_idct2(&scatter(&spec.coefficients, &spec.locations, spec.dims)?))
            })?;
            let sparse = if (b * pq) as f64 <= SPARSE_FLOP_CAP {
                Some(time(repeats, || idct2_sparse(&spec, &basis))?)
            } else {
                None
            };
            let dev_fast = fast.max_abs_diff(&dense)?;
            let dev_sparse = match &sparse {
                Some((_, m)) => m.max_abs_diff(&dense)?,
                None => 0.0,
            };
            agree &= dev_fast < AGREEMENT_TOL && dev_sparse < AGREEMENT_TOL;
            let row = |path: &str, t: String, dev: f64| {
                vec![k.to_string(), k.to_string(), b.to_string(), path.to_string(), t, num(dev)]
            };
            table.push(row("dense", num(t_dense), 0.0));
            table.push(row("fast", num(t_fast), dev_fast));
            table.push(match &sparse {
                Some((t, _)) => row("sparse", num(*t), dev_sparse),
                None => row("sparse", String::new(), 0.0),
            });
            let t_sparse = sparse.as_ref().map(|s| s.0);
            let fastest = match t_sparse {
                Some(ts) if ts <= t_fast && ts <= t_dense => "sparse",
                _ if t_fast <= t_dense => "fast",
                _ => "dense",
            };
            summary.push(format!(
                "{k}x{k} B={b}: dense {t_dense:.2e}s fast {t_fast:.2e}s sparse {} -> {fastest}",
                t_sparse.map_or("skipped".to_string(), |t| format!("{t:.2e}s"))
            ));
            cells.push(json!({
                "p": k,
                "q": k,
                "budget": b,
                "dense_s": t_dense,
                "fast_s": t_fast,
                "sparse_s": t_sparse,
                "fastest": fastest,
                "sparse_beats_dense": t_sparse.map(|t| t < t_dense),
                "max_abs_dev": dev_fast.max(dev_sparse),
            }));
        }
    }
    Ok(Report {
        experiment: "bench",
        pass: agree,
        tables: vec![table],
        results: json!({
            "repeats": repeats,
            "agreement_tol": AGREEMENT_TOL,
            "sparse_flop_cap": SPARSE_FLOP_CAP,
            "cells": cells,
        }),
        summary,
    })
}
