//! Gibbs ensemble `ρ = e^{−βH}/Z` of the coupled atom-field system.
//!
//! The state is diagonal in the dressed basis, so the joint entropy is the
//! Shannon entropy of the Boltzmann weights. The marginals follow by undoing
//! the dressing rotation: `|φ(n,1)⟩` puts `cos²θ_n` on `|n+1,g⟩` and `sin²θ_n`
//! on `|n,e⟩`, and `|φ(n,2)⟩` the other way round.
//!
//! Temperature enters as the dimensionless `(βħω)⁻¹` (`inv_beta`). When the
//! coupling is strong enough for `Ω(n,2) < 0`, the lowest state is an entangled
//! dressed level rather than `|0,g⟩`; at κ/ω = 2.5 and 5 it is `φ(1,2)` and
//! `φ(5,2)`. Their marginals are maximally mixed, so as `inv_beta → 0` the
//! ratio `(S_{A+R} − S_R)/S_A` tends to −1 there, not +1
//! (see [`zero_temperature_report`]).

use serde::Serialize;

use crate::densops::{neg_xlnx, shannon_entropy, BlockDensity, HermBlock2, ProbDist, QubitMarginal, TRACE_TOL};
use crate::infomeasures::EntropyReport;
use crate::spectrum::{
    ground_level, lambda_n, max_negative_branch, omega_ns, singlet_energy, theta_n, GroundLevel, LevelId, ModelParams,
};
use crate::{Error, Result};

/// Default relative tail mass left out of the partition function.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;
/// Default ceiling on the photon truncation.
pub const DEFAULT_N_CAP: usize = 100_000;
/// Levels kept beyond the last negative lower-branch level.
pub const NEGATIVE_BRANCH_MARGIN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConfig {
    pub params: ModelParams,
    /// Dimensionless temperature `(βħω)⁻¹`.
    pub inv_beta: f64,
    pub trunc_tol: f64,
    pub n_cap: usize,
}

impl ThermalConfig {
    pub fn new(params: ModelParams, inv_beta: f64) -> Self {
        Self { params, inv_beta, trunc_tol: DEFAULT_TRUNC_TOL, n_cap: DEFAULT_N_CAP }
    }

    pub fn with_trunc_tol(mut self, trunc_tol: f64) -> Self {
        self.trunc_tol = trunc_tol;
        self
    }

    pub fn with_n_cap(mut self, n_cap: usize) -> Self {
        self.n_cap = n_cap;
        self
    }

    /// `β` in inverse energy units.
    pub fn beta(&self) -> f64 {
        1.0 / (self.inv_beta * self.params.omega)
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.params.omega, self.params.omega0, self.params.kappa)?;
        if !(self.inv_beta.is_finite() && self.inv_beta > 0.0) {
            return Err(Error::InvalidParams(format!("inv_beta must be > 0, got {}", self.inv_beta)));
        }
        if !(self.trunc_tol > 0.0 && self.trunc_tol <= 1e-6) {
            return Err(Error::InvalidParams(format!("trunc_tol must be in (0, 1e-6], got {}", self.trunc_tol)));
        }
        Ok(())
    }
}

/// Lowest energy of the full spectrum.
fn minimum_energy(params: &ModelParams) -> f64 {
    let last = max_negative_branch(params).map_or(0, |n| n + 1);
    (0..=last).map(|n| omega_ns(params, n, 2).expect("valid branch")).fold(singlet_energy(params), f64::min)
}

fn lower_branch(params: &ModelParams, n: usize) -> f64 {
    params.omega * (n as f64 + 0.5) - lambda_n(params, n)
}

/// Upper bound on `Σ_{n>n_max} (e^{−βΩ(n,1)} + e^{−βΩ(n,2)})`, measured relative
/// to `e^{−β·shift}`.
///
/// Both terms are at most `e^{−βΩ(n,2)}`, and past `n_max + 1` the lower branch
/// grows by at least `d = Ω(n_max+2,2) − Ω(n_max+1,2)` per step (it is convex),
/// giving a geometric series. `None` while `d ≤ 0`.
fn boltzmann_tail(params: &ModelParams, beta: f64, shift: f64, n_max: usize) -> Option<f64> {
    let first = lower_branch(params, n_max + 1);
    let step = lower_branch(params, n_max + 2) - first;
    if step <= 0.0 {
        return None;
    }
    Some(2.0 * (-beta * (first - shift)).exp() / -(-beta * step).exp_m1())
}

/// Smallest `n_max` covering the negative lower branch (plus a margin of
/// [`NEGATIVE_BRANCH_MARGIN`]) whose Boltzmann tail bound is below
/// `trunc_tol` times the truncated partition function.
///
/// The bound is weighted by `1 + ln(Z/tail)`, the entropy carried per unit of
/// omitted mass, so that the entropies themselves move by `O(trunc_tol)` when
/// more levels are added.
pub fn resolve_truncation(cfg: &ThermalConfig) -> Result<usize> {
    cfg.validate()?;
    let params = &cfg.params;
    let beta = cfg.beta();
    let shift = minimum_energy(params);
    let floor = max_negative_branch(params).map_or(0, |n| n + NEGATIVE_BRANCH_MARGIN);

    let mut partial = (-beta * (singlet_energy(params) - shift)).exp();
    let mut n = 0;
    loop {
        if n > cfg.n_cap {
            let tail = match boltzmann_tail(params, beta, shift, cfg.n_cap) {
                _ if cfg.n_cap < floor => format!("negative lower branch needs n_max >= {floor}"),
                Some(tail) => format!("tail bound {tail:e} vs {:e} x Z_partial {partial:e}", cfg.trunc_tol),
                None => "lower branch still decreasing".to_owned(),
            };
            return Err(Error::TruncationExceedsCap {
                cap: cfg.n_cap,
                diagnostic: format!("{tail} at inv_beta = {}, kappa = {}", cfg.inv_beta, params.kappa),
            });
        }
        for s in [1, 2] {
            partial += (-beta * (omega_ns(params, n, s)? - shift)).exp();
        }
        if n >= floor {
            if let Some(tail) = boltzmann_tail(params, beta, shift, n) {
                let rel = tail / partial;
                if rel == 0.0 || (rel < 1.0 && rel * (1.0 - rel.ln()) < cfg.trunc_tol) {
                    return Ok(n);
                }
            }
        }
        n += 1;
    }
}

/// Normalized Boltzmann weights of the truncated spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoltzmannWeights {
    /// `w(0)` for `|0,g⟩`.
    pub singlet: f64,
    /// `[w(n,1), w(n,2)]` for `n = 0..=n_max`.
    pub pairs: Vec<[f64; 2]>,
    /// `ln Z` of the truncated sum.
    pub log_z: f64,
    /// Bound on the omitted weight relative to `Z`.
    pub tail_bound: f64,
}

impl BoltzmannWeights {
    pub fn n_max(&self) -> usize {
        self.pairs.len() - 1
    }

    pub fn partition_function(&self) -> f64 {
        self.log_z.exp()
    }

    /// Weights flattened as `w(0), w(0,1), w(0,2), w(1,1), …`.
    pub fn to_dist(&self) -> Result<ProbDist> {
        let mut weights = Vec::with_capacity(2 * self.pairs.len() + 1);
        weights.push(self.singlet);
        weights.extend(self.pairs.iter().flatten());
        ProbDist::new(weights, self.tail_bound)
    }

    fn compute(cfg: &ThermalConfig, n_max: usize) -> Result<Self> {
        let params = &cfg.params;
        let beta = cfg.beta();
        let shift = minimum_energy(params);
        let tail = boltzmann_tail(params, beta, shift, n_max).ok_or_else(|| Error::TruncationTooSmall {
            n_max,
            reason: "lower branch still decreasing; tail cannot be bounded".into(),
        })?;
        let boltzmann = |e: f64| (-beta * (e - shift)).exp();
        let singlet = boltzmann(singlet_energy(params));
        let pairs = (0..=n_max)
            .map(|n| Ok([boltzmann(omega_ns(params, n, 1)?), boltzmann(omega_ns(params, n, 2)?)]))
            .collect::<Result<Vec<_>>>()?;
        let z_shifted = singlet + pairs.iter().flatten().sum::<f64>();
        let tail_bound = tail / z_shifted;
        if tail_bound > TRACE_TOL {
            return Err(Error::TruncationTooSmall { n_max, reason: format!("tail bound {tail_bound:e}") });
        }
        Ok(Self {
            singlet: singlet / z_shifted,
            pairs: pairs.iter().map(|[a, b]| [a / z_shifted, b / z_shifted]).collect(),
            log_z: z_shifted.ln() - beta * shift,
            tail_bound,
        })
    }
}

/// Populations of `|0,g⟩` and the dressed levels, with their mixing angles.
#[derive(Debug, Clone, PartialEq)]
struct DressedPopulations<'a> {
    singlet: f64,
    pairs: &'a [[f64; 2]],
    thetas: &'a [f64],
}

impl DressedPopulations<'_> {
    fn atom_marginal(&self) -> QubitMarginal {
        let (mut p_g, mut p_e) = (self.singlet, 0.0);
        for (&[w1, w2], &theta) in self.pairs.iter().zip(self.thetas) {
            let (s, c) = theta.sin_cos();
            let (s2, c2) = (s * s, c * c);
            p_g += w1 * c2 + w2 * s2;
            p_e += w1 * s2 + w2 * c2;
        }
        QubitMarginal { p_g, p_e }
    }

    /// `p_n` over `0..=n_max+1`: level `n` feeds `|n,e⟩`, level `n−1` feeds `|n,g⟩`.
    fn photon_weights(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.pairs.len() + 1];
        p[0] = self.singlet;
        for (n, (&[w1, w2], &theta)) in self.pairs.iter().zip(self.thetas).enumerate() {
            let (s, c) = theta.sin_cos();
            let (s2, c2) = (s * s, c * c);
            p[n] += w1 * s2 + w2 * c2;
            p[n + 1] += w1 * c2 + w2 * s2;
        }
        p
    }
}

/// Thermal state at one parameter point, truncated and normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub cfg: ThermalConfig,
    pub weights: BoltzmannWeights,
    pub thetas: Vec<f64>,
}

impl ThermalEnsemble {
    /// Builds the ensemble at the truncation chosen by [`resolve_truncation`].
    pub fn new(cfg: &ThermalConfig) -> Result<Self> {
        let n_max = resolve_truncation(cfg)?;
        Self::with_n_max(cfg, n_max)
    }

    /// Builds the ensemble at a caller-chosen truncation.
    pub fn with_n_max(cfg: &ThermalConfig, n_max: usize) -> Result<Self> {
        cfg.validate()?;
        let weights = BoltzmannWeights::compute(cfg, n_max)?;
        let thetas = (0..=n_max).map(|n| theta_n(&cfg.params, n)).collect();
        Ok(Self { cfg: *cfg, weights, thetas })
    }

    pub fn n_max(&self) -> usize {
        self.weights.n_max()
    }

    fn populations(&self) -> DressedPopulations<'_> {
        DressedPopulations { singlet: self.weights.singlet, pairs: &self.weights.pairs, thetas: &self.thetas }
    }

    /// `S_{A+R}`: Shannon entropy of the Boltzmann weights.
    pub fn joint_entropy(&self) -> f64 {
        neg_xlnx(self.weights.singlet) + self.weights.pairs.iter().flatten().copied().map(neg_xlnx).sum::<f64>()
    }

    /// `(f₋, f₊)`, the ground and excited occupations of the atom.
    pub fn atom_marginal(&self) -> QubitMarginal {
        self.populations().atom_marginal()
    }

    /// Photon-number distribution `p_n` over `0..=n_max+1`.
    pub fn radiation_marginal(&self) -> Result<ProbDist> {
        ProbDist::new(self.populations().photon_weights(), self.weights.tail_bound)
    }

    /// The state in the dressed basis: diagonal blocks `(w(n,1), w(n,2))`.
    pub fn joint_density(&self) -> Result<BlockDensity> {
        let blocks =
            self.weights.pairs.iter().map(|&[w1, w2]| HermBlock2::diagonal(w1, w2)).collect::<Result<Vec<_>>>()?;
        BlockDensity::new(Some(self.weights.singlet), blocks, self.cfg.params)
    }

    pub fn report(&self) -> Result<EntropyReport> {
        let s_rad = shannon_entropy(&self.radiation_marginal()?);
        EntropyReport::new(self.joint_entropy(), self.atom_marginal().entropy(), s_rad)
    }
}

pub fn boltzmann_weights(cfg: &ThermalConfig) -> Result<BoltzmannWeights> {
    Ok(ThermalEnsemble::new(cfg)?.weights)
}

pub fn joint_entropy(cfg: &ThermalConfig) -> Result<f64> {
    Ok(ThermalEnsemble::new(cfg)?.joint_entropy())
}

pub fn atom_marginal(cfg: &ThermalConfig) -> Result<QubitMarginal> {
    Ok(ThermalEnsemble::new(cfg)?.atom_marginal())
}

pub fn radiation_marginal(cfg: &ThermalConfig) -> Result<ProbDist> {
    ThermalEnsemble::new(cfg)?.radiation_marginal()
}

pub fn joint_density(cfg: &ThermalConfig) -> Result<BlockDensity> {
    ThermalEnsemble::new(cfg)?.joint_density()
}

pub fn thermal_report(cfg: &ThermalConfig) -> Result<EntropyReport> {
    ThermalEnsemble::new(cfg)?.report()
}

/// The `T → 0` limit: equal mixture of the degenerate ground levels.
///
/// `n_max` bounds the scan for the ground state (see [`ground_level`]).
pub fn zero_temperature_report(params: &ModelParams, n_max: usize) -> Result<(GroundLevel, EntropyReport)> {
    let ground = ground_level(params, n_max)?;
    let share = 1.0 / ground.ties.len() as f64;
    let top = ground
        .ties
        .iter()
        .filter_map(|id| match id {
            LevelId::Dressed { n, .. } => Some(*n),
            LevelId::Singlet => None,
        })
        .max()
        .unwrap_or(0);
    let mut singlet = 0.0;
    let mut pairs = vec![[0.0; 2]; top + 1];
    for id in &ground.ties {
        match *id {
            LevelId::Singlet => singlet += share,
            LevelId::Dressed { n, s } => pairs[n][usize::from(s) - 1] += share,
        }
    }
    let thetas: Vec<f64> = (0..=top).map(|n| theta_n(params, n)).collect();
    let pops = DressedPopulations { singlet, pairs: &pairs, thetas: &thetas };
    let s_joint = neg_xlnx(singlet) + pairs.iter().flatten().copied().map(neg_xlnx).sum::<f64>();
    let s_rad = shannon_entropy(&ProbDist::exact(pops.photon_weights())?);
    let report = EntropyReport::new(s_joint, pops.atom_marginal().entropy(), s_rad)?;
    Ok((ground, report))
}
