//! # jc-entropy
//!
//! Von Neumann entropies of the resonant (and detuned) Jaynes-Cummings model:
//! one two-level atom coupled to one bosonic mode in the rotating-wave
//! approximation. Two ensembles are covered:
//!
//! - [`thermal`]: the Gibbs state at dimensionless temperature `(βħω)⁻¹`;
//! - [`dynamics`]: the unitary quench of an excited atom placed in a
//!   blackbody-like (geometric) or coherent (Poisson) photon field.
//!
//! For each parameter point the joint, marginal, conditional and mutual
//! entropies are assembled into an [`EntropyReport`] and the point is
//! classified as independent, classically correlated or supercorrelated
//! (negative conditional entropy). The [`sweep`] module turns this into
//! figure-ready tables and locates sign changes of
//! `(S_{A+R} − S_R)/S_A` by bisection.
//!
//! Everything works in ħ = 1 units and entropies are in nats.
//!
//! ```
//! use jc_entropy::{thermal::{thermal_report, ThermalConfig}, ModelParams, Regime};
//!
//! let cfg = ThermalConfig::new(ModelParams::resonant(5.0), 0.3);
//! let report = thermal_report(&cfg).unwrap();
//! assert_eq!(report.regime, Regime::Supercorrelated);
//! ```

pub mod densops;
pub mod dynamics;
mod error;
pub mod infomeasures;
pub mod spectrum;
pub mod sweep;
pub mod thermal;

pub use densops::{BlockDensity, HermBlock2, ProbDist, QubitMarginal};
pub use error::{Error, Result};
pub use infomeasures::{EntropyReport, Regime, Tolerances};
pub use spectrum::{DressedLevel, LevelId, ModelParams};
