//! Conditional and mutual entropies and the correlation regimes they imply.
//!
//! With `S(A+R|R) = S_{A+R} − S_R` and `S(A:R) = S_A + S_R − S_{A+R}`,
//! classical correlations obey `0 ≤ S(A:R) ≤ min(S_A, S_R)`. Quantum states may
//! go up to `2·min(S_A, S_R)`; the band above the classical bound (equivalently,
//! a negative conditional entropy) is the supercorrelated regime.

use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

/// Numerical thresholds used when building and classifying reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack on the entropy inequalities.
    pub bound: f64,
    /// A report is degenerate (ratio undefined) below this marginal entropy.
    pub degenerate: f64,
    /// Margin around regime boundaries.
    pub regime: f64,
    /// Inequality violations beyond this are treated as bugs, not noise.
    pub violation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { bound: 1e-9, degenerate: 1e-9, regime: 1e-6, violation: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// A marginal entropy vanishes; the ratio is undefined.
    Degenerate,
    Independent,
    ClassicallyCorrelated,
    Supercorrelated,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Degenerate => "degenerate",
            Regime::Independent => "independent",
            Regime::ClassicallyCorrelated => "classically_correlated",
            Regime::Supercorrelated => "supercorrelated",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All entropy functionals at one parameter point, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub s_joint: f64,
    pub s_atom: f64,
    pub s_rad: f64,
    /// `S_{A+R} − S_R`
    pub cond_given_rad: f64,
    /// `S_{A+R} − S_A`
    pub cond_given_atom: f64,
    pub mutual: f64,
    /// `(S_{A+R} − S_R)/S_A`, absent for degenerate reports.
    pub ratio: Option<f64>,
    pub regime: Regime,
    /// Mutual entropy sits on the classical bound `min(S_A, S_R)`.
    pub at_classical_bound: bool,
}

/// `(S_{A+R} − S_R, S_{A+R} − S_A)`; either may be negative.
pub fn conditional_entropies(s_joint: f64, s_atom: f64, s_rad: f64) -> (f64, f64) {
    (s_joint - s_rad, s_joint - s_atom)
}

/// `S_A + S_R − S_{A+R}` checked against `[0, 2·min(S_A, S_R)]`.
///
/// Excursions up to [`Tolerances::violation`] are accepted as rounding;
/// anything larger means the inputs are inconsistent and is an error.
pub fn mutual_entropy(s_joint: f64, s_atom: f64, s_rad: f64) -> Result<f64> {
    mutual_entropy_with(s_joint, s_atom, s_rad, Tolerances::default().violation)
}

fn mutual_entropy_with(s_joint: f64, s_atom: f64, s_rad: f64, violation: f64) -> Result<f64> {
    let mutual = s_atom + s_rad - s_joint;
    let upper = 2.0 * s_atom.min(s_rad);
    if !mutual.is_finite() || mutual < -violation || mutual > upper + violation {
        return Err(Error::BoundViolation(format!(
            "mutual entropy {mutual} outside [0, {upper}] (S_AR={s_joint}, S_A={s_atom}, S_R={s_rad})"
        )));
    }
    Ok(mutual)
}

/// Regime of a report; see [`Regime`].
pub fn classify(report: &EntropyReport, tol: &Tolerances) -> Regime {
    let min_marginal = report.s_atom.min(report.s_rad);
    if min_marginal < tol.degenerate {
        Regime::Degenerate
    } else if report.mutual > min_marginal + tol.regime {
        Regime::Supercorrelated
    } else if report.mutual < tol.regime {
        Regime::Independent
    } else {
        Regime::ClassicallyCorrelated
    }
}

/// Whether the mutual entropy is within `tol.regime` of `min(S_A, S_R)`.
pub fn at_classical_bound(report: &EntropyReport, tol: &Tolerances) -> bool {
    (report.mutual - report.s_atom.min(report.s_rad)).abs() <= tol.regime
}

impl EntropyReport {
    pub fn new(s_joint: f64, s_atom: f64, s_rad: f64) -> Result<Self> {
        Self::with_tolerances(s_joint, s_atom, s_rad, &Tolerances::default())
    }

    pub fn with_tolerances(s_joint: f64, s_atom: f64, s_rad: f64, tol: &Tolerances) -> Result<Self> {
        for (name, s) in [("S_AR", s_joint), ("S_A", s_atom), ("S_R", s_rad)] {
            if !s.is_finite() || s < -tol.violation {
                return Err(Error::BoundViolation(format!("{name} = {s} is not a valid entropy")));
            }
        }
        let (cond_given_rad, cond_given_atom) = conditional_entropies(s_joint, s_atom, s_rad);
        let mutual = mutual_entropy_with(s_joint, s_atom, s_rad, tol.violation)?;
        let mut report = Self {
            s_joint,
            s_atom,
            s_rad,
            cond_given_rad,
            cond_given_atom,
            mutual,
            ratio: None,
            regime: Regime::Degenerate,
            at_classical_bound: false,
        };
        report.regime = classify(&report, tol);
        if report.regime != Regime::Degenerate {
            report.ratio = Some(cond_given_rad / s_atom);
            report.at_classical_bound = at_classical_bound(&report, tol);
        }
        Ok(report)
    }

    /// Checks the entropy inequalities and the ratio identity.
    ///
    /// `bound` is the slack on `0 ≤ S(A:R) ≤ 2 min`, Araki-Lieb and
    /// subadditivity; the identity `ratio = 1 − S(A:R)/S_A` is held to `1e-10`.
    pub fn check_invariants(&self, bound: f64) -> Result<()> {
        let min_marginal = self.s_atom.min(self.s_rad);
        let mut failures = Vec::new();
        if self.mutual < -bound || self.mutual > 2.0 * min_marginal + bound {
            failures.push(format!("mutual {} outside [0, 2*{min_marginal}]", self.mutual));
        }
        if (self.s_atom - self.s_rad).abs() > self.s_joint + bound {
            failures.push(format!("Araki-Lieb: |{} - {}| > {}", self.s_atom, self.s_rad, self.s_joint));
        }
        if self.s_joint > self.s_atom + self.s_rad + bound {
            failures.push(format!("subadditivity: {} > {} + {}", self.s_joint, self.s_atom, self.s_rad));
        }
        if let Some(ratio) = self.ratio {
            let identity = 1.0 - self.mutual / self.s_atom;
            if (ratio - identity).abs() > 1e-10 {
                failures.push(format!("ratio {ratio} != 1 - mutual/S_A = {identity}"));
            }
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::BoundViolation(failures.join("; ")))
        }
    }
}
