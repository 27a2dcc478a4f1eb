//! Dressed-state eigensystem of the Jaynes-Cummings Hamiltonian
//!
//! ```text
//! H = ω a†a + (ω₀/2) σ_z + κ (a† σ₋ + a σ₊)
//! ```
//!
//! conserves the excitation number, so apart from the bare ground state
//! `|0,g⟩` (energy `−ω₀/2`) it splits into 2×2 blocks spanned by
//! `{|n+1,g⟩, |n,e⟩}`. Each block is diagonalized by the dressed states
//!
//! ```text
//! |φ(n,1)⟩ =  cos θ_n |n+1,g⟩ + sin θ_n |n,e⟩,   Ω(n,1) = ω(n+½) + λ_n
//! |φ(n,2)⟩ = −sin θ_n |n+1,g⟩ + cos θ_n |n,e⟩,   Ω(n,2) = ω(n+½) − λ_n
//! ```
//!
//! with `λ_n = √((Δω/2)² + κ²(n+1))`, `Δω = ω − ω₀` and
//! `tan θ_n = κ√(n+1) / (Δω/2 + λ_n)`.
//!
//! ## Negative lower-branch levels
//!
//! For strong coupling the lower branch `Ω(n,2)` dips below zero for a finite
//! run of photon numbers. Direct evaluation at resonance gives:
//!
//! | κ/ω | `{n : Ω(n,2) < 0}` | note |
//! |-----|--------------------|------|
//! | 0.5 | ∅                  | `Ω(0,2) = 0` exactly, not negative |
//! | 2.5 | `{0, …, 6}`        | `Ω(6,2) = 6.5 − 2.5√7 ≈ −0.114` |
//! | 5   | `{0, …, 24}`       | `Ω(24,2) = −0.5`, `Ω(25,2) ≈ +0.005` |
//!
//! These differ from counts that are sometimes quoted for the same couplings
//! (`Ω(0,2) < 0` at κ/ω = 0.5, `n ≤ 5` at 2.5, `n ≤ 25` at 5); the table above
//! is what the formulas give and is checked by a brute-force scan in the tests.

use serde::Serialize;

use crate::{Error, Result};

/// Physical constants of the model in ħ = 1 units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Field-mode frequency ω.
    pub omega: f64,
    /// Atomic splitting ω₀.
    pub omega0: f64,
    /// Dipole coupling κ.
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(omega: f64, omega0: f64, kappa: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {omega}")));
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParams(format!("omega0 must be > 0, got {omega0}")));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParams(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(Self { omega, omega0, kappa })
    }

    /// Resonant model with ω = ω₀ = 1, so `kappa_ratio` is κ/ω.
    ///
    /// Panics if `kappa_ratio` is negative or not finite.
    pub fn resonant(kappa_ratio: f64) -> Self {
        Self::new(1.0, 1.0, kappa_ratio).expect("kappa/omega must be finite and >= 0")
    }

    pub fn detuning(&self) -> f64 {
        self.omega - self.omega0
    }

    pub fn is_resonant(&self) -> bool {
        self.detuning() == 0.0
    }

    /// Coupling `κ√(n+1)` between `|n+1,g⟩` and `|n,e⟩`.
    pub fn coupling(&self, n: usize) -> f64 {
        self.kappa * ((n + 1) as f64).sqrt()
    }
}

/// Identifies one eigenstate of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LevelId {
    /// The uncoupled ground state `|0,g⟩`.
    Singlet,
    /// Dressed state `|φ(n,s)⟩`.
    Dressed { n: usize, s: u8 },
}

/// One dressed eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedLevel {
    pub n: usize,
    pub s: u8,
    pub energy: f64,
    pub theta: f64,
}

/// Half the Rabi splitting of block `n`: `√((Δω/2)² + κ²(n+1))`.
pub fn lambda_n(params: &ModelParams, n: usize) -> f64 {
    let half_detuning = 0.5 * params.detuning();
    half_detuning.hypot(params.coupling(n))
}

/// Mixing angle of block `n`.
///
/// Follows `tan θ = κ√(n+1) / (Δω/2 + λ_n)`. Below resonance the denominator
/// is rewritten as `κ²(n+1)/(λ_n − Δω/2)` to avoid cancellation; in the
/// uncoupled limit this gives θ = 0 for ω ≥ ω₀ and θ = π/2 for ω < ω₀, where
/// `|n,e⟩` is the upper level.
pub fn theta_n(params: &ModelParams, n: usize) -> f64 {
    let g = params.coupling(n);
    let half_detuning = 0.5 * params.detuning();
    let lambda = lambda_n(params, n);
    if half_detuning >= 0.0 {
        if g == 0.0 {
            return 0.0;
        }
        (g / (half_detuning + lambda)).atan()
    } else {
        // tan θ = (λ − Δω/2) / g
        std::f64::consts::FRAC_PI_2 - (g / (lambda - half_detuning)).atan()
    }
}

/// Dressed energy `Ω(n,s) = ω(n+½) + (3 − 2s)λ_n`.
pub fn omega_ns(params: &ModelParams, n: usize, s: u8) -> Result<f64> {
    let sign = match s {
        1 => 1.0,
        2 => -1.0,
        other => return Err(Error::InvalidBranch(other)),
    };
    Ok(params.omega * (n as f64 + 0.5) + sign * lambda_n(params, n))
}

/// Energy of `|0,g⟩`.
pub fn singlet_energy(params: &ModelParams) -> f64 {
    -0.5 * params.omega0
}

pub fn dressed_level(params: &ModelParams, n: usize, s: u8) -> Result<DressedLevel> {
    Ok(DressedLevel { n, s, energy: omega_ns(params, n, s)?, theta: theta_n(params, n) })
}

/// All dressed levels with `n ≤ n_max`, ordered by `(n, s)`.
pub fn levels(params: &ModelParams, n_max: usize) -> Vec<DressedLevel> {
    (0..=n_max).flat_map(|n| [1u8, 2].map(|s| dressed_level(params, n, s).expect("valid branch"))).collect()
}

fn lower_branch(params: &ModelParams, n: usize) -> f64 {
    params.omega * (n as f64 + 0.5) - lambda_n(params, n)
}

/// Photon indices `n ≤ n_max` whose lower-branch energy is strictly negative.
pub fn negative_branch_set(params: &ModelParams, n_max: usize) -> Vec<usize> {
    (0..=n_max).filter(|&n| lower_branch(params, n) < 0.0).collect()
}

/// Largest index of the negative lower branch, scanning until `Ω(n,2)` is
/// positive and increasing (it is strictly convex in `n`, so nothing further
/// can be negative).
pub fn max_negative_branch(params: &ModelParams) -> Option<usize> {
    let mut last = None;
    let mut n = 0;
    loop {
        let e = lower_branch(params, n);
        if e < 0.0 {
            last = Some(n);
        } else if lower_branch(params, n + 1) > e {
            return last;
        }
        n += 1;
    }
}

/// Lowest eigenstate together with any exactly degenerate partners.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundLevel {
    pub level: LevelId,
    pub energy: f64,
    /// Every level within rounding of the minimum, including `level`.
    pub ties: Vec<LevelId>,
}

/// Minimizes the energy over `|0,g⟩` and all `φ(n,s)` with `n ≤ n_max`.
///
/// Fails if the lower branch is still decreasing at `n_max`, since a lower
/// level could then lie beyond the scan.
pub fn ground_level(params: &ModelParams, n_max: usize) -> Result<GroundLevel> {
    let edge = lower_branch(params, n_max);
    let next = lower_branch(params, n_max + 1);
    if next <= edge {
        return Err(Error::TruncationTooSmall {
            n_max,
            reason: format!("lower branch still decreasing ({edge} -> {next})"),
        });
    }

    let mut candidates = vec![(LevelId::Singlet, singlet_energy(params))];
    for n in 0..=n_max {
        candidates.push((LevelId::Dressed { n, s: 2 }, lower_branch(params, n)));
        candidates.push((LevelId::Dressed { n, s: 1 }, omega_ns(params, n, 1)?));
    }
    let (level, energy) = candidates.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty");
    let tie_tol = 1e-12 * energy.abs().max(params.omega);
    let mut ties: Vec<LevelId> =
        candidates.iter().filter(|(_, e)| (e - energy).abs() <= tie_tol).map(|(id, _)| *id).collect();
    ties.sort();
    Ok(GroundLevel { level, energy, ties })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn detuned_345() -> ModelParams {
        // Δω = 6 and κ = 4 so that at n = 0: Δω/2 = 3, κ√1 = 4, λ = 5.
        ModelParams::new(7.0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_n(&ModelParams::resonant(1.0), 0), 1.0);
        assert_eq!(lambda_n(&ModelParams::resonant(5.0), 24), 25.0);
        assert_abs_diff_eq!(lambda_n(&detuned_345(), 0), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_examples() {
        for kappa in [0.1, 1.0, 2.5, 5.0] {
            for n in [0, 3, 40] {
                assert_abs_diff_eq!(theta_n(&ModelParams::resonant(kappa), n), FRAC_PI_4, epsilon = 1e-15);
            }
        }
        let uncoupled = ModelParams::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(theta_n(&uncoupled, 3), 0.0);
        assert_abs_diff_eq!(theta_n(&detuned_345(), 0), 0.4636476090008061, epsilon = 1e-15);
    }

    #[test]
    fn theta_below_resonance_matches_quotient() {
        let p = ModelParams::new(1.0, 3.0, 0.7).unwrap();
        for n in 0..10 {
            let direct = (p.coupling(n) / (0.5 * p.detuning() + lambda_n(&p, n))).atan();
            assert_abs_diff_eq!(theta_n(&p, n), direct, epsilon = 1e-12);
        }
        let uncoupled = ModelParams::new(1.0, 3.0, 0.0).unwrap();
        assert_eq!(theta_n(&uncoupled, 0), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn dressed_vectors_are_eigenvectors() {
        for p in [ModelParams::resonant(0.8), detuned_345(), ModelParams::new(1.0, 2.5, 0.3).unwrap()] {
            for n in 0..6 {
                let g = p.coupling(n);
                let h_gg = p.omega * (n + 1) as f64 - 0.5 * p.omega0;
                let h_ee = p.omega * n as f64 + 0.5 * p.omega0;
                let (c, s) = (theta_n(&p, n).cos(), theta_n(&p, n).sin());
                let e1 = omega_ns(&p, n, 1).unwrap();
                let e2 = omega_ns(&p, n, 2).unwrap();
                assert_abs_diff_eq!(h_gg * c + g * s, e1 * c, epsilon = 1e-12);
                assert_abs_diff_eq!(g * c + h_ee * s, e1 * s, epsilon = 1e-12);
                assert_abs_diff_eq!(-h_gg * s + g * c, -e2 * s, epsilon = 1e-12);
                assert_abs_diff_eq!(-g * s + h_ee * c, e2 * c, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn energy_examples() {
        let p = ModelParams::resonant(0.5);
        assert_eq!(omega_ns(&p, 0, 1).unwrap(), 1.0);
        assert_eq!(omega_ns(&p, 0, 2).unwrap(), 0.0);
        assert_eq!(singlet_energy(&p), -0.5);
        assert_eq!(omega_ns(&p, 0, 3), Err(Error::InvalidBranch(3)));
    }

    #[test]
    fn negative_branch_examples() {
        assert_eq!(negative_branch_set(&ModelParams::resonant(2.5), 50), (0..=6).collect::<Vec<_>>());
        assert_eq!(negative_branch_set(&ModelParams::resonant(5.0), 50), (0..=24).collect::<Vec<_>>());
        assert!(negative_branch_set(&ModelParams::resonant(0.0), 50).is_empty());
        assert!(negative_branch_set(&ModelParams::resonant(0.5), 50).is_empty());
        assert_eq!(max_negative_branch(&ModelParams::resonant(5.0)), Some(24));
        assert_eq!(max_negative_branch(&ModelParams::resonant(0.5)), None);
    }

    #[test]
    fn ground_level_examples() {
        let weak = ground_level(&ModelParams::resonant(0.1), 10).unwrap();
        assert_eq!(weak.level, LevelId::Singlet);
        assert_eq!(weak.energy, -0.5);

        let strong = ground_level(&ModelParams::resonant(5.0), 40).unwrap();
        assert_eq!(strong.level, LevelId::Dressed { n: 5, s: 2 });
        assert_abs_diff_eq!(strong.energy, -6.747448713915890, epsilon = 1e-12);
        assert_eq!(strong.ties, vec![strong.level]);

        assert_eq!(ground_level(&ModelParams::resonant(0.0), 0).unwrap().level, LevelId::Singlet);
        assert!(matches!(ground_level(&ModelParams::resonant(5.0), 3), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn ground_level_reports_ties() {
        // Ω(0,2) = Ω(1,2) when 1 = κ(√2 − 1).
        let kappa = 1.0 / (2f64.sqrt() - 1.0);
        let g = ground_level(&ModelParams::resonant(kappa), 20).unwrap();
        assert_eq!(g.ties.len(), 2, "{g:?}");
        assert!(g.ties.contains(&LevelId::Dressed { n: 0, s: 2 }));
        assert!(g.ties.contains(&LevelId::Dressed { n: 1, s: 2 }));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN).is_err());
        let p = ModelParams::new(1.5, 1.0, 0.2).unwrap();
        assert_eq!(p.detuning(), 0.5);
        assert!(!p.is_resonant());
        assert!(ModelParams::resonant(3.0).is_resonant());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn splitting_is_twice_lambda(kappa in 0.0..10.0f64, det in -3.0..3.0f64, n in 0usize..200) {
                let p = ModelParams::new(1.0 + det.max(-0.9), 1.0, kappa).unwrap();
                let split = omega_ns(&p, n, 1).unwrap() - omega_ns(&p, n, 2).unwrap();
                prop_assert!((split - 2.0 * lambda_n(&p, n)).abs() <= 1e-12 * (1.0 + split.abs()));
            }

            #[test]
            fn upper_branch_positive(kappa in 1e-6..10.0f64, n in 0usize..500) {
                prop_assert!(omega_ns(&ModelParams::resonant(kappa), n, 1).unwrap() > 0.0);
            }

            #[test]
            fn theta_in_range_and_monotone(k1 in 0.0..20.0f64, dk in 0.0..5.0f64, det in 0.0..4.0f64, n in 0usize..50) {
                let p1 = ModelParams::new(1.0 + det, 1.0, k1).unwrap();
                let p2 = ModelParams::new(1.0 + det, 1.0, k1 + dk).unwrap();
                let (t1, t2) = (theta_n(&p1, n), theta_n(&p2, n));
                prop_assert!((0.0..std::f64::consts::FRAC_PI_2).contains(&t1));
                prop_assert!(t2 >= t1 - 1e-15);
                prop_assert!(t1 <= FRAC_PI_4 + 1e-15);
                let (s, c) = t1.sin_cos();
                prop_assert!((s * s + c * c - 1.0).abs() < 1e-15);
            }

            #[test]
            fn negative_set_is_finite_prefix(kappa in 0.0..8.0f64) {
                let p = ModelParams::resonant(kappa);
                let set = negative_branch_set(&p, 400);
                prop_assert!(set.iter().enumerate().all(|(i, &n)| i == n));
                prop_assert_eq!(set.last().copied(), max_negative_branch(&p));
            }
        }
    }
}
