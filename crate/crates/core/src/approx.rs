//! Budget-constrained reconstructions of a weight matrix: truncated SVD,
//! three Fourier selection rules and top-magnitude DCT.
//!
//! Each Fourier and DCT scheme has two error paths: the residual of the
//! reconstructed matrix and the tail sum of the dropped spectral energies.
//! The Monte Carlo harness uses the tail sums; tests assert the two agree.

use rand::seq::index;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{conjugate_partner, ComplexMatrix, DenseMatrix};
use crate::stats::{Rng, RunningStats};
use crate::transforms::{
    dct2, dft2, half_matrices, idct2_dense, idft2, DctBasis, HalfMatrices, ReferenceMatrix,
};

/// Parameter budgets matched to a rank-`r` low-rank factorization of a p×q
/// matrix, which stores `N0 = (p + q)·r` numbers.
///
/// `N1`, `N3` and `ND` buy one real number each, so they are `N0/2`
/// complex-cell or real-slot selections. `N2` cells each store a location
/// plus a complex value, three numbers, so `N2 = N0/3`. All divisions floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub nd: usize,
}

impl BudgetSpec {
    pub fn new(p: usize, q: usize, r: usize) -> Result<Self> {
        if p == 0 || q == 0 || r == 0 {
            return Err(Error::InvalidArgument(format!(
                "budget needs positive p, q, r; got {p}, {q}, {r}"
            )));
        }
        let n0 = (p + q) * r;
        let spec = Self {
            p,
            q,
            r,
            n0,
            n1: n0 / 2,
            n2: n0 / 3,
            n3: n0 / 2,
            nd: n0 / 2,
        };
        let cells = ReferenceMatrix::new(p, q)?.retained_cells().len();
        for (n, what) in [(spec.n1, "retained cells"), (spec.n2, "retained cells")] {
            if n > cells {
                return Err(Error::BudgetTooLarge {
                    requested: n,
                    available: cells,
                    what,
                });
            }
        }
        if spec.n3 > p * q {
            return Err(Error::BudgetTooLarge {
                requested: spec.n3,
                available: p * q,
                what: "spectral slots",
            });
        }
        if spec.n2 == 0 {
            return Err(Error::InvalidArgument("budget rounds down to zero".into()));
        }
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LowRank,
    FourierRandom,
    FourierTopAmplitude,
    FourierTopCoeff,
    DctTop,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::FourierRandom,
        Method::LowRank,
        Method::FourierTopAmplitude,
        Method::FourierTopCoeff,
        Method::DctTop,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::LowRank => "lowrank",
            Method::FourierRandom => "fourier_random",
            Method::FourierTopAmplitude => "fourier_top_amplitude",
            Method::FourierTopCoeff => "fourier_top_coeff",
            Method::DctTop => "dct_top",
        }
    }
}

/// Monte Carlo summary of one method's reconstruction errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub method: Method,
    pub trial_errors: Vec<f64>,
    pub mean: f64,
    /// `None` when fewer than two trials ran.
    pub stderr: Option<f64>,
    pub k: usize,
    pub r: usize,
    pub trials: usize,
}

impl ApproximationReport {
    pub fn from_errors(method: Method, k: usize, r: usize, trial_errors: Vec<f64>) -> Result<Self> {
        if trial_errors.is_empty() {
            return Err(Error::InvalidArgument("report needs at least one trial".into()));
        }
        let stats: RunningStats = trial_errors.iter().copied().collect();
        Ok(Self {
            method,
            trials: trial_errors.len(),
            mean: stats.mean,
            stderr: stats.stderr(),
            trial_errors,
            k,
            r,
        })
    }
}

/// `‖W − Ŵ‖_F²`.
pub fn reconstruction_error(w: &DenseMatrix, w_hat: &DenseMatrix) -> Result<f64> {
    Ok(w.sub(w_hat)?.frobenius_sq())
}

/// Rank-`r` truncated SVD reconstruction.
pub fn lowrank_approx(w: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let max = w.rows().min(w.cols());
    if r == 0 || r > max {
        return Err(Error::InvalidArgument(format!("rank {r} outside 1..={max}")));
    }
    linalg::truncated_svd(w, r)
}

/// Tail energy `Σ_{i>r} σ_i²` of descending singular values.
pub fn closed_form_l_r(singular_values: &[f64], r: usize) -> Result<f64> {
    if r > singular_values.len() {
        return Err(Error::InvalidArgument(format!(
            "rank {r} exceeds {} singular values",
            singular_values.len()
        )));
    }
    if singular_values.windows(2).any(|w| w[1] > w[0]) || singular_values.iter().any(|&s| s < 0.0)
    {
        return Err(Error::InvalidArgument(
            "singular values must be nonnegative and descending".into(),
        ));
    }
    Ok(singular_values[r..].iter().map(|s| s * s).sum())
}

/// Expected energy kept by `N1 = K·r` uniformly random retained cells of an
/// i.i.d. standard Gaussian K×K matrix.
pub fn expected_random_selection(k: usize, r: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be at least 2, got {k}")));
    }
    let kf = k as f64;
    let cells = if k % 2 == 0 {
        kf * kf / 2.0 + 2.0
    } else {
        (kf * kf + 1.0) / 2.0
    };
    Ok(kf.powi(3) * r as f64 / cells)
}

/// Real or imaginary half of a spectral cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Re,
    Im,
}

/// One selectable real number of the retained half-spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub row: usize,
    pub col: usize,
    pub part: Part,
}

/// DFT spectrum of a real matrix with its conjugate bookkeeping.
#[derive(Clone, Debug)]
pub struct SpectrumAnalysis {
    pub spectrum: ComplexMatrix,
    pub reference: ReferenceMatrix,
    pub half: HalfMatrices,
    /// Retained cells in row-major order.
    pub cells: Vec<(usize, usize)>,
    total: f64,
}

/// Indices of the `n` largest values, ties resolved by position.
fn top_indices(values: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order.truncate(n);
    order
}

impl SpectrumAnalysis {
    pub fn new(w: &DenseMatrix) -> Result<Self> {
        let spectrum = dft2(w);
        let reference = ReferenceMatrix::new(w.rows(), w.cols())?;
        let half = half_matrices(&spectrum, &reference)?;
        let cells = reference.retained_cells();
        let total = w.frobenius_sq();
        Ok(Self {
            spectrum,
            reference,
            half,
            cells,
            total,
        })
    }

    /// `‖W‖²`, the energy of the whole spectrum.
    pub fn total_energy(&self) -> f64 {
        self.total
    }

    fn check_cells(&self, n: usize) -> Result<()> {
        if n > self.cells.len() {
            return Err(Error::BudgetTooLarge {
                requested: n,
                available: self.cells.len(),
                what: "retained cells",
            });
        }
        Ok(())
    }

    /// Real slots of `F^S`: every retained cell's real part and, unless the
    /// cell is self-conjugate, its imaginary part. Ordered by
    /// (row, col, real before imaginary).
    pub fn slots(&self) -> Vec<(Slot, f64)> {
        let mut out = Vec::with_capacity(2 * self.cells.len());
        for &(row, col) in &self.cells {
            out.push((
                Slot {
                    row,
                    col,
                    part: Part::Re,
                },
                self.half.re[(row, col)],
            ));
            if self.reference.get(row, col) == 1 {
                out.push((
                    Slot {
                        row,
                        col,
                        part: Part::Im,
                    },
                    self.half.im[(row, col)],
                ));
            }
        }
        out
    }

    pub fn random_cells(&self, n: usize, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
        self.check_cells(n)?;
        let mut picked: Vec<usize> = index::sample(rng, self.cells.len(), n).into_vec();
        picked.sort_unstable();
        Ok(picked.into_iter().map(|i| self.cells[i]).collect())
    }

    pub fn top_amplitude_cells(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        self.check_cells(n)?;
        let amps: Vec<f64> = self.cells.iter().map(|&c| self.half.h[c]).collect();
        Ok(top_indices(&amps, n).into_iter().map(|i| self.cells[i]).collect())
    }

    pub fn top_coeff_slots(&self, n: usize) -> Result<Vec<Slot>> {
        let slots = self.slots();
        if n > slots.len() {
            return Err(Error::BudgetTooLarge {
                requested: n,
                available: slots.len(),
                what: "spectral slots",
            });
        }
        let values: Vec<f64> = slots.iter().map(|s| s.1).collect();
        Ok(top_indices(&values, n).into_iter().map(|i| slots[i].0).collect())
    }

    /// Tail-sum error of keeping the given cells in full: the half-matrix
    /// energy of every retained cell left out.
    pub fn cells_error(&self, cells: &[(usize, usize)]) -> f64 {
        let q = self.spectrum.cols();
        let mut kept = vec![false; self.spectrum.rows() * q];
        for &(i, j) in cells {
            kept[i * q + j] = true;
        }
        self.cells
            .iter()
            .filter(|&&(i, j)| !kept[i * q + j])
            .map(|&c| self.half.h[c])
            .sum()
    }

    /// Tail-sum error of keeping the given real slots.
    pub fn slots_error(&self, slots: &[Slot]) -> f64 {
        let q = self.spectrum.cols();
        let mut kept = vec![[false; 2]; self.spectrum.rows() * q];
        for s in slots {
            kept[s.row * q + s.col][s.part as usize] = true;
        }
        self.cells
            .iter()
            .map(|&(i, j)| {
                let k = kept[i * q + j];
                let re = if k[0] { 0.0 } else { self.half.re[(i, j)] };
                let im = if k[1] { 0.0 } else { self.half.im[(i, j)] };
                re + im
            })
            .sum()
    }

    fn keep_and_invert(&self, kept: impl Iterator<Item = ((usize, usize), Complex64)>) -> Result<DenseMatrix> {
        let (p, q) = self.spectrum.dims();
        let mut g = ComplexMatrix::zeros(p, q);
        for ((i, j), z) in kept {
            g[(i, j)] += z;
            let partner = conjugate_partner(i, j, p, q);
            if partner != (i, j) {
                g[partner] += z.conj();
            }
        }
        let back = idft2(&g)?;
        let residue = back.max_imag();
        if residue > 1e-8 * (1.0 + self.total.sqrt()) {
            return Err(Error::Numerical(format!(
                "mirrored spectrum left imaginary residue {residue:e}"
            )));
        }
        Ok(back.real_part())
    }

    pub fn reconstruct_cells(&self, cells: &[(usize, usize)]) -> Result<DenseMatrix> {
        self.keep_and_invert(cells.iter().map(|&c| (c, self.spectrum[c])))
    }

    pub fn reconstruct_slots(&self, slots: &[Slot]) -> Result<DenseMatrix> {
        self.keep_and_invert(slots.iter().map(|s| {
            let z = self.spectrum[(s.row, s.col)];
            let part = match s.part {
                Part::Re => Complex64::new(z.re, 0.0),
                Part::Im => Complex64::new(0.0, z.im),
            };
            ((s.row, s.col), part)
        }))
    }
}

/// Keeps the full complex value at `n1` uniformly random retained cells.
pub fn fourier_random_approx(w: &DenseMatrix, n1: usize, rng: &mut Rng) -> Result<DenseMatrix> {
    let a = SpectrumAnalysis::new(w)?;
    let cells = a.random_cells(n1, rng)?;
    a.reconstruct_cells(&cells)
}

/// Keeps the `n2` retained cells with the largest half-matrix energy.
pub fn fourier_top_amplitude_approx(w: &DenseMatrix, n2: usize) -> Result<DenseMatrix> {
    let a = SpectrumAnalysis::new(w)?;
    let cells = a.top_amplitude_cells(n2)?;
    a.reconstruct_cells(&cells)
}

/// Keeps the `n3` largest individual real or imaginary slots.
pub fn fourier_top_coeff_approx(w: &DenseMatrix, n3: usize) -> Result<DenseMatrix> {
    let a = SpectrumAnalysis::new(w)?;
    let slots = a.top_coeff_slots(n3)?;
    a.reconstruct_slots(&slots)
}

/// Cells of the `nd` largest-magnitude DCT coefficients, ties by position.
pub fn dct_top_cells(spectrum: &DenseMatrix, nd: usize) -> Result<Vec<(usize, usize)>> {
    let (p, q) = spectrum.dims();
    if nd > p * q {
        return Err(Error::BudgetTooLarge {
            requested: nd,
            available: p * q,
            what: "DCT coefficients",
        });
    }
    let mags: Vec<f64> = spectrum.as_slice().iter().map(|v| v.abs()).collect();
    Ok(top_indices(&mags, nd)
        .into_iter()
        .map(|i| (i / q, i % q))
        .collect())
}

/// Tail-sum error of the top-`nd` DCT selection.
pub fn dct_top_error(w: &DenseMatrix, nd: usize) -> Result<f64> {
    let basis = DctBasis::shared(w.rows(), w.cols())?;
    let f = dct2(w, &basis)?;
    dct_tail_energy(&f, nd)
}

/// Energy of the DCT coefficients dropped by top-`nd` selection.
pub fn dct_tail_energy(spectrum: &DenseMatrix, nd: usize) -> Result<f64> {
    let q = spectrum.cols();
    let mut kept = vec![false; spectrum.as_slice().len()];
    for (i, j) in dct_top_cells(spectrum, nd)? {
        kept[i * q + j] = true;
    }
    Ok(spectrum
        .as_slice()
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| !k)
        .map(|(v, _)| v * v)
        .sum())
}

/// Keeps the `nd` largest-magnitude DCT coefficients.
pub fn dct_top_approx(w: &DenseMatrix, nd: usize) -> Result<DenseMatrix> {
    let basis = DctBasis::shared(w.rows(), w.cols())?;
    let f = dct2(w, &basis)?;
    let mut kept = DenseMatrix::zeros(w.rows(), w.cols());
    for c in dct_top_cells(&f, nd)? {
        kept[c] = f[c];
    }
    idct2_dense(&kept, &basis)
}
