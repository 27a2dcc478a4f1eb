//! Unitary quench from `|e⟩⟨e| ⊗ Σ p(n)|n⟩⟨n|`.
//!
//! The initial state `|n,e⟩ = sin θ_n |φ(n,1)⟩ + cos θ_n |φ(n,2)⟩` only
//! dephases under the Hamiltonian, so the joint state stays a mixture of pure
//! two-level superpositions with weights `p(n)`. Its entropy is that of the
//! photon source for all times, while the marginals follow the Rabi weights
//!
//! ```text
//! W_n(t) = sin²(2θ_n) · sin²(λ_n t)
//! w_g(t) = Σ p(n) W_n(t)
//! P_n(t) = p(n)(1 − W_n(t)) + p(n−1) W_{n−1}(t)
//! ```
//!
//! At resonance `λ_n = κ√(n+1)`; off resonance the generalized Rabi frequency
//! is used. The dressed-basis coherence of block `n` is
//! `p(n) sin θ_n cos θ_n e^{−2iλ_n t}`, which keeps every block rank one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::densops::{compensated_sum, neg_xlnx, shannon_entropy, BlockDensity, HermBlock2, ProbDist, QubitMarginal};
use crate::infomeasures::EntropyReport;
use crate::spectrum::{lambda_n, theta_n, ModelParams};
use crate::{Error, Result};

/// Default tail mass left out of a photon distribution.
pub const DEFAULT_SOURCE_TOL: f64 = 1e-14;
/// Default ceiling on the photon truncation.
pub const DEFAULT_N_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Geometric,
    Poisson,
    Custom,
}

impl SourceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceKind::Geometric => "geometric",
            SourceKind::Poisson => "poisson",
            SourceKind::Custom => "custom",
        }
    }
}

/// Photon-number statistics of the initial field.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// Blackbody-like: `p(n) = N̄ⁿ/(1+N̄)^{n+1}`.
    Geometric {
        nbar: f64,
    },
    /// Coherent: `p(n) = N̄ⁿ e^{−N̄}/n!`.
    Poisson {
        nbar: f64,
    },
    Custom(ProbDist),
}

impl SourceModel {
    pub fn kind(&self) -> SourceKind {
        match self {
            SourceModel::Geometric { .. } => SourceKind::Geometric,
            SourceModel::Poisson { .. } => SourceKind::Poisson,
            SourceModel::Custom(_) => SourceKind::Custom,
        }
    }

    /// Mean photon number.
    pub fn nbar(&self) -> f64 {
        match self {
            SourceModel::Geometric { nbar } | SourceModel::Poisson { nbar } => *nbar,
            SourceModel::Custom(dist) => dist.mean(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SourceModel::Geometric { nbar } | SourceModel::Poisson { nbar } => {
                if nbar.is_finite() && *nbar > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSource(format!("mean photon number must be > 0, got {nbar}")))
                }
            }
            SourceModel::Custom(dist) if dist.is_empty() => Err(Error::InvalidSource("empty distribution".into())),
            SourceModel::Custom(_) => Ok(()),
        }
    }
}

/// Truncated photon distribution of `source` with cap [`DEFAULT_N_CAP`].
pub fn photon_dist(source: &SourceModel, trunc_tol: f64) -> Result<ProbDist> {
    photon_dist_capped(source, trunc_tol, DEFAULT_N_CAP)
}

/// Smallest truncation whose omitted probability mass and omitted first
/// moment `Σ_{n>n_max} n p(n)` are both below `trunc_tol`. The stored weights
/// plus the recorded tail bound sum to one.
pub fn photon_dist_capped(source: &SourceModel, trunc_tol: f64, n_cap: usize) -> Result<ProbDist> {
    source.validate()?;
    if !(trunc_tol > 0.0 && trunc_tol <= 1e-6) {
        return Err(Error::InvalidParams(format!("trunc_tol must be in (0, 1e-6], got {trunc_tol}")));
    }
    let exceeded = |tail: f64| Error::TruncationExceedsCap {
        cap: n_cap,
        diagnostic: format!(
            "{} source with mean {}: tail {tail:e} > {trunc_tol:e}",
            source.kind().as_str(),
            source.nbar()
        ),
    };
    match source {
        SourceModel::Geometric { nbar } => {
            let ln_q = -(1.0 / nbar).ln_1p();
            let p0 = 1.0 / (1.0 + nbar);
            let mut weights = Vec::new();
            loop {
                let n = weights.len();
                let qn = (n as f64 * ln_q).exp();
                if n > n_cap {
                    return Err(exceeded(qn));
                }
                weights.push(p0 * qn);
                let qn = qn * ln_q.exp();
                // tail beyond n: q^{n+1}; first moment: q^{n+1}(n + 1 + N̄)
                if qn < trunc_tol && qn * (n as f64 + 1.0 + nbar) < trunc_tol {
                    return ProbDist::new(weights, qn);
                }
            }
        }
        SourceModel::Poisson { nbar } => {
            // Shape relative to the mode by ratio recurrence, normalized at
            // the end; evaluating each log-pmf directly loses ~1e-13.
            let mode = nbar.floor() as usize;
            if mode > n_cap {
                return Err(exceeded(1.0));
            }
            let p_mode = (mode as f64 * nbar.ln() - nbar - ln_factorial(mode)).exp();
            let mut shape = vec![1.0; mode + 1];
            for k in (0..mode).rev() {
                shape[k] = shape[k + 1] * (k + 1) as f64 / nbar;
            }
            loop {
                let n = shape.len() - 1;
                let next = shape[n] * nbar / (n as f64 + 1.0);
                // Past the mode p(k+1)/p(k) = N̄/(k+1) ≤ N̄/(n+2) for k > n.
                let ratio = nbar / (n as f64 + 2.0);
                if ratio < 1.0 {
                    let tail = next / (1.0 - ratio);
                    // Σ_{k>n} k p(k) = N̄ Σ_{k≥n} p(k)
                    let moment = nbar * (shape[n] + tail);
                    if tail * p_mode < trunc_tol && moment * p_mode < trunc_tol {
                        let norm = compensated_sum(shape.iter().copied()) + tail;
                        let weights = shape.into_iter().map(|w| w / norm).collect();
                        return ProbDist::new(weights, tail / norm);
                    }
                }
                if n >= n_cap {
                    return Err(exceeded(shape[n] * p_mode));
                }
                shape.push(next);
            }
        }
        SourceModel::Custom(dist) => {
            if dist.n_max() > n_cap {
                return Err(exceeded(dist.tail_bound()));
            }
            Ok(dist.clone())
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// The time-independent joint entropy `S_{A+R}`, which equals the entropy of
/// the initial field.
///
/// Geometric: `(N̄+1) ln(N̄+1) − N̄ ln N̄`. Poisson: `N̄ − N̄ ln N̄ + Σ p(n) ln n!`,
/// summed until the terms fall below `1e-17` past the mode. Custom sources use
/// the Shannon entropy of the given distribution.
pub fn joint_entropy_closed_form(source: &SourceModel) -> f64 {
    match source {
        SourceModel::Geometric { nbar } => (nbar + 1.0) * nbar.ln_1p() + neg_xlnx(*nbar),
        SourceModel::Poisson { nbar } => {
            let ln_nbar = nbar.ln();
            let mut series = 0.0;
            for n in 0.. {
                let ln_fact = ln_factorial(n);
                let term = (n as f64 * ln_nbar - nbar - ln_fact).exp() * ln_fact;
                series += term;
                if n as f64 > *nbar && term < 1e-17 {
                    break;
                }
            }
            nbar + neg_xlnx(*nbar) + series
        }
        SourceModel::Custom(dist) => shannon_entropy(dist),
    }
}

/// `W_n(t) = sin²(2θ_n) sin²(λ_n t)`.
pub fn rabi_weight(params: &ModelParams, n: usize, t: f64) -> f64 {
    let mixing = (2.0 * theta_n(params, n)).sin();
    let phase = (lambda_n(params, n) * t).sin();
    mixing * mixing * phase * phase
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchConfig {
    pub params: ModelParams,
    pub source: SourceModel,
    pub trunc_tol: f64,
    pub n_cap: usize,
}

impl QuenchConfig {
    pub fn new(params: ModelParams, source: SourceModel) -> Self {
        Self { params, source, trunc_tol: DEFAULT_SOURCE_TOL, n_cap: DEFAULT_N_CAP }
    }

    pub fn with_trunc_tol(mut self, trunc_tol: f64) -> Self {
        self.trunc_tol = trunc_tol;
        self
    }

    pub fn with_n_cap(mut self, n_cap: usize) -> Self {
        self.n_cap = n_cap;
        self
    }

    /// `κt` for the dimensionless time `τ = κt/(π√N̄)`.
    pub fn kt_from_tau(&self, tau: f64) -> f64 {
        tau * PI * self.source.nbar().sqrt()
    }

    /// Raw time `t` for the dimensionless time `τ`.
    pub fn time_from_tau(&self, tau: f64) -> f64 {
        self.kt_from_tau(tau) / self.params.kappa
    }

    pub fn tau_from_time(&self, t: f64) -> f64 {
        self.params.kappa * t / (PI * self.source.nbar().sqrt())
    }
}

/// A quench with its photon distribution and per-block constants resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Quench {
    pub cfg: QuenchConfig,
    pub dist: ProbDist,
    thetas: Vec<f64>,
    lambdas: Vec<f64>,
    /// `sin²(2θ_n)`
    mixing: Vec<f64>,
    s_joint: f64,
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("time must be finite and >= 0, got {t}")))
    }
}

impl Quench {
    pub fn new(cfg: &QuenchConfig) -> Result<Self> {
        let dist = photon_dist_capped(&cfg.source, cfg.trunc_tol, cfg.n_cap)?;
        let thetas: Vec<f64> = (0..dist.len()).map(|n| theta_n(&cfg.params, n)).collect();
        let lambdas = (0..dist.len()).map(|n| lambda_n(&cfg.params, n)).collect();
        let mixing = thetas.iter().map(|th| (2.0 * th).sin().powi(2)).collect();
        let s_joint = joint_entropy_closed_form(&cfg.source);
        Ok(Self { cfg: cfg.clone(), dist, thetas, lambdas, mixing, s_joint })
    }

    fn rabi_weights(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.mixing.iter().zip(&self.lambdas).map(move |(m, lam)| m * (lam * t).sin().powi(2))
    }

    /// Conserved joint entropy of the quench.
    pub fn joint_entropy(&self) -> f64 {
        self.s_joint
    }

    pub fn atom_marginal(&self, t: f64) -> Result<QubitMarginal> {
        check_time(t)?;
        let w_g: f64 = self.dist.weights().iter().zip(self.rabi_weights(t)).map(|(p, w)| p * w).sum();
        Ok(QubitMarginal::from_ground(w_g))
    }

    /// `P_n(t)` over `0..=n_max+1`.
    pub fn radiation_marginal(&self, t: f64) -> Result<ProbDist> {
        check_time(t)?;
        let mut out = vec![0.0; self.dist.len() + 1];
        for (n, (&p, w)) in self.dist.weights().iter().zip(self.rabi_weights(t)).enumerate() {
            out[n] += p * (1.0 - w);
            out[n + 1] += p * w;
        }
        ProbDist::new(out, self.dist.tail_bound())
    }

    /// Joint state in the dressed basis at time `t`.
    pub fn joint_density(&self, t: f64) -> Result<BlockDensity> {
        check_time(t)?;
        let blocks = self
            .dist
            .weights()
            .iter()
            .zip(self.thetas.iter().zip(&self.lambdas))
            .map(|(&p, (&theta, &lambda))| {
                let (s, c) = theta.sin_cos();
                // Ω(n,1) − Ω(n,2) = 2λ_n
                let coherence = Complex64::from_polar(p * s * c, -2.0 * lambda * t);
                HermBlock2::new(p * s * s, p * c * c, coherence)
            })
            .collect::<Result<Vec<_>>>()?;
        BlockDensity::new(None, blocks, self.cfg.params)
    }

    /// Leading small-time behaviour of `(S_{A+R} − S_R)/S_A`:
    ///
    /// ```text
    /// Σ_n (n+1) p(n) ln(p(n)/p(n+1))  /  (N̄+1) [ln(κ²t²) − 1 + ln(N̄+1)]
    /// ```
    ///
    /// The numerator needs `p(n) > 0` wherever `p(n+1) > 0`. The last stored
    /// index of a truncated distribution is skipped; a distribution with exact
    /// finite support has no small-time expansion of this form.
    pub fn small_time_ratio(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::SmallTimeUndefined(format!("needs t > 0, got {t}")));
        }
        let weights = self.dist.weights();
        let truncated = self.dist.tail_bound() > 0.0;
        let mut numerator = 0.0;
        for (n, &p) in weights.iter().enumerate() {
            let next = self.dist.get(n + 1);
            match (p > 0.0, next > 0.0) {
                (true, true) => numerator += (n + 1) as f64 * p * (p / next).ln(),
                (false, false) => {}
                (false, true) => return Err(Error::SmallTimeUndefined(format!("p({n}) = 0 but p({}) > 0", n + 1))),
                (true, false) => {
                    if !(truncated && n + 1 == weights.len()) {
                        return Err(Error::SmallTimeUndefined(format!("p({n}) > 0 but p({}) = 0", n + 1)));
                    }
                }
            }
        }
        let nbar = self.cfg.source.nbar();
        let kt = self.cfg.params.kappa * t;
        let denominator = (nbar + 1.0) * ((kt * kt).ln() - 1.0 + nbar.ln_1p());
        if denominator == 0.0 || !denominator.is_finite() {
            return Err(Error::SmallTimeUndefined(format!("denominator {denominator} at kappa*t = {kt}")));
        }
        Ok(numerator / denominator)
    }

    pub fn report(&self, t: f64) -> Result<EntropyReport> {
        let s_atom = self.atom_marginal(t)?.entropy();
        let s_rad = shannon_entropy(&self.radiation_marginal(t)?);
        EntropyReport::new(self.s_joint, s_atom, s_rad)
    }
}

pub fn atom_marginal_t(cfg: &QuenchConfig, t: f64) -> Result<QubitMarginal> {
    Quench::new(cfg)?.atom_marginal(t)
}

pub fn radiation_marginal_t(cfg: &QuenchConfig, t: f64) -> Result<ProbDist> {
    Quench::new(cfg)?.radiation_marginal(t)
}

pub fn joint_density_t(cfg: &QuenchConfig, t: f64) -> Result<BlockDensity> {
    Quench::new(cfg)?.joint_density(t)
}

pub fn small_time_ratio(cfg: &QuenchConfig, t: f64) -> Result<f64> {
    Quench::new(cfg)?.small_time_ratio(t)
}

pub fn dynamics_report(cfg: &QuenchConfig, t: f64) -> Result<EntropyReport> {
    Quench::new(cfg)?.report(t)
}
