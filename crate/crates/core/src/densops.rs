//! Probability vectors and block-diagonal density operators.
//!
//! Both ensembles are block diagonal in the dressed basis: an optional weight
//! on `|0,g⟩` plus one Hermitian 2×2 block per photon index `n` acting on
//! `{|φ(n,1)⟩, |φ(n,2)⟩}`. Entropies are computed from closed-form block
//! spectra. [`dense_embed`] rebuilds the full matrix in the product basis
//! `|n⟩⊗|g⟩, |n⟩⊗|e⟩` so that tests can cross-check everything against a
//! brute-force Hermitian eigendecomposition and explicit partial traces.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::spectrum::{theta_n, ModelParams};
use crate::{Error, Result};

/// Tolerance for positive semidefiniteness and for clamping tiny negative
/// eigenvalues before taking logarithms.
pub const PSD_EPS: f64 = 1e-12;

/// Allowed missing trace of a truncated density operator.
pub const TRACE_TOL: f64 = 1e-6;

const SUM_SLACK: f64 = 1e-10;

/// `−x ln x` with `0 ln 0 = 0`.
#[inline]
pub fn neg_xlnx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Truncated probability vector over `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbDist {
    weights: Vec<f64>,
    tail_bound: f64,
}

impl ProbDist {
    /// Validates and stores a truncated distribution.
    ///
    /// `tail_bound` is an upper bound on the probability mass left out of
    /// `weights`. Tiny negative weights (above `-PSD_EPS`) are clamped to 0.
    pub fn new(mut weights: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if !(tail_bound.is_finite() && (0.0..=TRACE_TOL).contains(&tail_bound)) {
            return Err(Error::InvalidDensity(format!("tail bound {tail_bound} outside [0, {TRACE_TOL}]")));
        }
        for (index, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() || *w < -PSD_EPS {
                return Err(Error::InvalidDistribution { index, value: *w });
            }
            *w = w.max(0.0);
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + SUM_SLACK || total < 1.0 - tail_bound - SUM_SLACK {
            return Err(Error::InvalidDensity(format!("total mass {total} outside [1 - {tail_bound}, 1]")));
        }
        Ok(Self { weights, tail_bound })
    }

    /// Distribution with no truncation.
    pub fn exact(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, 0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of index `n`; zero beyond the stored range.
    pub fn get(&self, n: usize) -> f64 {
        self.weights.get(n).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest stored index.
    pub fn n_max(&self) -> usize {
        self.weights.len().saturating_sub(1)
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.weights.iter().enumerate().map(|(n, w)| n as f64 * w))
    }
}

/// Shannon entropy `−Σ w ln w` of a validated distribution, in nats.
pub fn shannon_entropy(dist: &ProbDist) -> f64 {
    dist.weights.iter().copied().map(neg_xlnx).sum()
}

/// Shannon entropy of raw weights, rejecting negative entries beyond `PSD_EPS`.
pub fn entropy_of_weights(weights: &[f64]) -> Result<f64> {
    weights.iter().enumerate().try_fold(0.0, |acc, (index, &w)| {
        if !w.is_finite() || w < -PSD_EPS {
            Err(Error::InvalidDistribution { index, value: w })
        } else {
            Ok(acc + neg_xlnx(w))
        }
    })
}

/// Ground/excited populations of the atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitMarginal {
    pub p_g: f64,
    pub p_e: f64,
}

impl QubitMarginal {
    /// Builds the marginal from the ground population, `p_e = 1 − p_g`.
    pub fn from_ground(p_g: f64) -> Self {
        Self { p_g, p_e: 1.0 - p_g }
    }

    /// Builds the marginal from the excited population, `p_g = 1 − p_e`.
    pub fn from_excited(p_e: f64) -> Self {
        Self { p_g: 1.0 - p_e, p_e }
    }

    /// Binary entropy in nats.
    pub fn entropy(&self) -> f64 {
        // ln(1 - x) via ln_1p keeps the majority term accurate when the
        // minority population is tiny.
        let (major, minor) = if self.p_g >= self.p_e { (self.p_g, self.p_e) } else { (self.p_e, self.p_g) };
        let minor = minor.max(0.0);
        let major_term = if major > 0.0 { -major * (-minor).ln_1p() } else { 0.0 };
        major_term + neg_xlnx(minor)
    }
}

/// Hermitian 2×2 block `[[a, c], [c*, b]]` in the dressed basis of one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermBlock2 {
    /// Population of `φ(n,1)`.
    pub a: f64,
    /// Population of `φ(n,2)`.
    pub b: f64,
    /// Coherence `⟨φ(n,1)|ρ|φ(n,2)⟩`.
    pub c: Complex64,
}

impl HermBlock2 {
    pub fn new(a: f64, b: f64, c: Complex64) -> Result<Self> {
        let block = Self { a, b, c };
        if !(a.is_finite() && b.is_finite() && c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidDensity(format!("non-finite block {block:?}")));
        }
        if a < -PSD_EPS || b < -PSD_EPS || a * b - c.norm_sqr() < -PSD_EPS {
            return Err(Error::InvalidDensity(format!("block not positive semidefinite: {block:?}")));
        }
        Ok(block)
    }

    pub fn diagonal(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, Complex64::new(0.0, 0.0))
    }

    pub fn trace(&self) -> f64 {
        self.a + self.b
    }
}

/// Eigenvalues `(λ₊, λ₋)` of a PSD 2×2 Hermitian block.
///
/// The smaller eigenvalue comes from `det/λ₊` so that it stays accurate near
/// rank one; both are clamped to `[0, a+b]` and sum to `a + b` up to one
/// rounding.
pub fn block_eigvals(block: &HermBlock2) -> (f64, f64) {
    let trace = block.a + block.b;
    if trace <= 0.0 {
        return (0.0, 0.0);
    }
    let half_gap = 0.5 * (block.a - block.b);
    let radius = half_gap.hypot(block.c.norm());
    let upper = (0.5 * trace + radius).min(trace);
    let det = block.a * block.b - block.c.norm_sqr();
    let lower = if upper > 0.0 { (det / upper).clamp(0.0, trace) } else { 0.0 };
    (trace - lower, lower)
}

/// Density operator, block diagonal in the dressed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDensity {
    /// Weight of `|0,g⟩`, if that state is populated at all.
    pub singlet_weight: Option<f64>,
    /// Block `n` acts on `{φ(n,1), φ(n,2)}`.
    pub blocks: Vec<HermBlock2>,
    /// Model used to map dressed states to the product basis.
    pub params: ModelParams,
}

impl BlockDensity {
    pub fn new(singlet_weight: Option<f64>, blocks: Vec<HermBlock2>, params: ModelParams) -> Result<Self> {
        if let Some(w) = singlet_weight {
            if !w.is_finite() || w < -PSD_EPS {
                return Err(Error::InvalidDensity(format!("singlet weight {w}")));
            }
        }
        let rho = Self { singlet_weight, blocks, params };
        let trace = rho.trace();
        if !(1.0 - TRACE_TOL..=1.0 + SUM_SLACK).contains(&trace) {
            return Err(Error::InvalidDensity(format!("trace {trace} outside [1 - {TRACE_TOL}, 1]")));
        }
        Ok(rho)
    }

    pub fn trace(&self) -> f64 {
        self.singlet_weight.unwrap_or(0.0) + self.blocks.iter().map(HermBlock2::trace).sum::<f64>()
    }

    /// All eigenvalues: singlet first, then `(λ₊, λ₋)` per block.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.blocks.len() + 1);
        out.extend(self.singlet_weight);
        for block in &self.blocks {
            let (hi, lo) = block_eigvals(block);
            out.push(hi);
            out.push(lo);
        }
        out
    }
}

/// `−Tr ρ ln ρ` from the block spectra, in nats.
pub fn von_neumann_entropy(rho: &BlockDensity) -> f64 {
    rho.eigenvalues().into_iter().map(neg_xlnx).sum()
}

/// Product-basis index of `|n⟩⊗|g⟩`.
#[inline]
pub fn ground_index(n: usize) -> usize {
    2 * n
}

/// Product-basis index of `|n⟩⊗|e⟩`.
#[inline]
pub fn excited_index(n: usize) -> usize {
    2 * n + 1
}

/// Embeds `rho` as a dense `2(n_max+1)`-dimensional matrix over
/// `|0,g⟩, |0,e⟩, |1,g⟩, |1,e⟩, …`.
///
/// Block `n` occupies `|n+1,g⟩` and `|n,e⟩`, so `n_max` must be at least the
/// number of blocks.
pub fn dense_embed(rho: &BlockDensity, n_max: usize) -> Result<DMatrix<Complex64>> {
    if n_max < rho.blocks.len() {
        return Err(Error::TruncationTooSmall {
            n_max,
            reason: format!("{} blocks need photon index {}", rho.blocks.len(), rho.blocks.len()),
        });
    }
    let dim = 2 * (n_max + 1);
    let mut dense = DMatrix::<Complex64>::zeros(dim, dim);
    if let Some(w) = rho.singlet_weight {
        dense[(0, 0)] = Complex64::new(w, 0.0);
    }
    for (n, block) in rho.blocks.iter().enumerate() {
        let (s, c) = theta_n(&rho.params, n).sin_cos();
        // Columns of the dressed-to-bare rotation in (|n+1,g⟩, |n,e⟩).
        let u = [[c, -s], [s, c]];
        let b = [[Complex64::new(block.a, 0.0), block.c], [block.c.conj(), Complex64::new(block.b, 0.0)]];
        let idx = [ground_index(n + 1), excited_index(n)];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..2 {
                        acc += b[k][l] * (u[i][k] * u[j][l]);
                    }
                }
                dense[(idx[i], idx[j])] += acc;
            }
        }
    }
    Ok(dense)
}

/// Eigenvalues of a dense Hermitian matrix by full decomposition.
pub fn dense_eigenvalues(dense: &DMatrix<Complex64>) -> Vec<f64> {
    dense.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Entropy of a dense Hermitian density matrix; eigenvalues below
/// `PSD_EPS` in magnitude are treated as zero.
pub fn dense_entropy(dense: &DMatrix<Complex64>) -> f64 {
    dense_eigenvalues(dense).into_iter().map(|lam| if lam.abs() < PSD_EPS { 0.0 } else { neg_xlnx(lam) }).sum()
}

fn check_dense_shape(dense: &DMatrix<Complex64>) -> Result<usize> {
    if dense.nrows() != dense.ncols() || !dense.nrows().is_multiple_of(2) || dense.nrows() == 0 {
        return Err(Error::InvalidDensity(format!(
            "expected square matrix of even dimension, got {}x{}",
            dense.nrows(),
            dense.ncols()
        )));
    }
    Ok(dense.nrows() / 2)
}

/// Atomic marginal `Tr_R ρ`. The atomic coherence must vanish within `PSD_EPS`.
pub fn partial_trace_radiation(dense: &DMatrix<Complex64>) -> Result<QubitMarginal> {
    let photons = check_dense_shape(dense)?;
    let mut p_g = 0.0;
    let mut p_e = 0.0;
    let mut coherence = Complex64::new(0.0, 0.0);
    for n in 0..photons {
        p_g += dense[(ground_index(n), ground_index(n))].re;
        p_e += dense[(excited_index(n), excited_index(n))].re;
        coherence += dense[(ground_index(n), excited_index(n))];
    }
    if coherence.norm() >= PSD_EPS {
        return Err(Error::OffDiagonalCoherence { row: 0, col: 1, magnitude: coherence.norm() });
    }
    Ok(QubitMarginal { p_g, p_e })
}

/// Photon-number marginal `Tr_A ρ`. Every photon coherence must vanish within
/// `PSD_EPS`.
pub fn partial_trace_atom(dense: &DMatrix<Complex64>) -> Result<ProbDist> {
    let photons = check_dense_shape(dense)?;
    let reduced =
        |n: usize, m: usize| dense[(ground_index(n), ground_index(m))] + dense[(excited_index(n), excited_index(m))];
    for n in 0..photons {
        for m in (n + 1)..photons {
            let magnitude = reduced(n, m).norm();
            if magnitude >= PSD_EPS {
                return Err(Error::OffDiagonalCoherence { row: n, col: m, magnitude });
            }
        }
    }
    let weights: Vec<f64> = (0..photons).map(|n| reduced(n, n).re).collect();
    let missing = (1.0 - weights.iter().sum::<f64>()).clamp(0.0, TRACE_TOL);
    ProbDist::new(weights, missing)
}
