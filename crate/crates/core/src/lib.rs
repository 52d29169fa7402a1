//! Simulation and training of a two-photon linear-optical quantum cloner.
//!
//! The crate is layered bottom-up:
//!
//! * [`fock`] — mode labels, Fock configurations, dense complex matrices and
//!   permanent-based multi-photon transition amplitudes.
//! * [`optics`] — the polarization-dependent beam splitter, input-state
//!   preparation and two-photon evolution.
//! * [`cloner`] — post-selected coincidence statistics, shot-noise sampling and
//!   clone fidelities.
//! * [`optimize`] — a Nelder-Mead simplex minimizer for noisy objectives.
//! * [`trainer`] — the online learning loop, test-set evaluation and
//!   cost-landscape scans.

pub mod cloner;
pub mod fock;
pub mod optics;
pub mod optimize;
pub mod trainer;

pub use cloner::{CoincidenceCounts, CoincidenceProbabilities, FidelityPair};
pub use fock::{ComplexMatrix, FockConfig, ModeLabel, Polarization};
pub use optics::{GateParams, PolarizationQubit, TwoPhotonState};
pub use optimize::{OptimizerConfig, Simplex, StepKind};
pub use trainer::{ExperimentConfig, LearningTrace, Model, NoiseMode};

/// Optimal symmetric 1→2 phase-covariant cloning fidelity, ½(1 + 1/√2).
pub const OPTIMAL_FIDELITY: f64 = 0.5 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);
