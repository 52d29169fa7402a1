//! Measurement model of the cloner: post-selected coincidences, projective
//! statistics, shot noise and clone fidelities.
//!
//! Clone 1 is the photon leaving spatial mode 1, clone 2 the photon leaving
//! spatial mode 2. In every `xy` pair below the first letter refers to clone 1;
//! `p` is projection onto the signal state and `o` onto its orthogonal
//! complement.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::fock::{FockConfig, ModeLabel, Polarization};
use crate::optics::{self, GateParams, OpticsError, PolarizationQubit, TwoPhotonState, NUM_MODES};

/// Coincidence probability below which post-selection is treated as empty.
pub const MIN_COINCIDENCE_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClonerError {
    #[error("post-selection never succeeds (coincidence probability {probability:.3e})")]
    DegeneratePostSelection { probability: f64 },
    #[error("no coincidences recorded")]
    EmptySample,
    #[error("mean total count must be positive and finite, got {0}")]
    InvalidMeanTotal(f64),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Fidelities of the two clones with the input signal state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FidelityPair {
    pub f1: f64,
    pub f2: f64,
}

impl FidelityPair {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    pub fn min(&self) -> f64 {
        self.f1.min(self.f2)
    }
}

/// Absolute probabilities of the four projection outcomes, each jointly with
/// a successful coincidence (one photon per output path).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceProbabilities {
    pub pp: f64,
    pub po: f64,
    pub op: f64,
    pub oo: f64,
}

impl CoincidenceProbabilities {
    /// Total coincidence probability p_cc.
    pub fn total(&self) -> f64 {
        self.pp + self.po + self.op + self.oo
    }

    fn as_array(&self) -> [f64; 4] {
        [self.pp, self.po, self.op, self.oo]
    }

    /// F₁ = (pp + po)/Σ, F₂ = (pp + op)/Σ.
    pub fn fidelities(&self) -> Result<FidelityPair, ClonerError> {
        let total = self.total();
        if total <= MIN_COINCIDENCE_PROBABILITY {
            return Err(ClonerError::DegeneratePostSelection { probability: total });
        }
        Ok(FidelityPair::new(
            (self.pp + self.po) / total,
            (self.pp + self.op) / total,
        ))
    }
}

/// Recorded coincidence tallies for the four projection settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct CoincidenceCounts {
    pub pp: u64,
    pub po: u64,
    pub op: u64,
    pub oo: u64,
}

impl CoincidenceCounts {
    pub fn new(pp: u64, po: u64, op: u64, oo: u64) -> Self {
        Self { pp, po, op, oo }
    }

    pub fn sigma(&self) -> u64 {
        self.pp + self.po + self.op + self.oo
    }
}

/// 2×2 density matrix of a single clone's polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity(pub [[Complex64; 2]; 2]);

impl QubitDensity {
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn expectation(&self, psi: &PolarizationQubit) -> f64 {
        let v = [psi.h, psi.v];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += v[i].conj() * self.0[i][j] * v[j];
            }
        }
        acc.re
    }

    /// Eigenvalues in ascending order, assuming the matrix is Hermitian.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    /// max |ρ − ρ†|
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }
}

/// The coincidence part of the gate output: amplitudes `[p][q]` for clone 1
/// polarized `p` and clone 2 polarized `q` (index 0 = H, 1 = V). Not
/// normalized; its squared norm is the coincidence probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelected {
    pub amplitudes: [[Complex64; 2]; 2],
}

impl PostSelected {
    pub fn from_state(state: &TwoPhotonState) -> Self {
        let mut amplitudes = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, p) in Polarization::ALL.into_iter().enumerate() {
            for (j, q) in Polarization::ALL.into_iter().enumerate() {
                let config = FockConfig::from_modes(
                    NUM_MODES,
                    &[ModeLabel::new(p, 1), ModeLabel::new(q, 2)],
                );
                amplitudes[i][j] = state.amplitude(&config);
            }
        }
        Self { amplitudes }
    }

    pub fn probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .flatten()
            .map(Complex64::norm_sqr)
            .sum()
    }

    /// |(⟨a| ⊗ ⟨b|) ψ|²
    pub fn projection(&self, a: &PolarizationQubit, b: &PolarizationQubit) -> f64 {
        let av = [a.h, a.v];
        let bv = [b.h, b.v];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += av[i].conj() * bv[j].conj() * self.amplitudes[i][j];
            }
        }
        acc.norm_sqr()
    }

    /// Reduced density matrices of clone 1 and clone 2 after normalizing the
    /// post-selected state.
    pub fn reduced_densities(&self) -> Result<[QubitDensity; 2], ClonerError> {
        let p = self.probability();
        if p <= MIN_COINCIDENCE_PROBABILITY {
            return Err(ClonerError::DegeneratePostSelection { probability: p });
        }
        let psi = self.amplitudes;
        let zero = Complex64::new(0.0, 0.0);
        let mut first = [[zero; 2]; 2];
        let mut second = [[zero; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..2 {
                    first[a][b] += psi[a][k] * psi[b][k].conj() / p;
                    second[a][b] += psi[k][a] * psi[k][b].conj() / p;
                }
            }
        }
        Ok([QubitDensity(first), QubitDensity(second)])
    }
}

/// Runs the gate on the prepared input and keeps the coincidence amplitudes.
pub fn post_selected_output(params: &GateParams, eta: f64) -> Result<PostSelected, ClonerError> {
    let input = optics::prepare_input(eta, params.omega);
    let u = optics::build_scattering_matrix(params.phi, params.theta);
    let output = optics::evolve(&input, &u)?;
    Ok(PostSelected::from_state(&output))
}

pub fn coincidence_probabilities(
    params: &GateParams,
    eta: f64,
) -> Result<CoincidenceProbabilities, ClonerError> {
    let out = post_selected_output(params, eta)?;
    let par = PolarizationQubit::equatorial(eta);
    let perp = par.orthogonal();
    Ok(CoincidenceProbabilities {
        pp: out.projection(&par, &par),
        po: out.projection(&par, &perp),
        op: out.projection(&perp, &par),
        oo: out.projection(&perp, &perp),
    })
}

/// Clone fidelities from exact projection probabilities.
pub fn exact_fidelities(params: &GateParams, eta: f64) -> Result<FidelityPair, ClonerError> {
    coincidence_probabilities(params, eta)?.fidelities()
}

/// Clone fidelities as ⟨ψ|ρⱼ|ψ⟩ with ρⱼ the partial trace of the
/// post-selected two-photon polarization state.
pub fn fidelities_via_density_matrix(
    params: &GateParams,
    eta: f64,
) -> Result<FidelityPair, ClonerError> {
    let [rho1, rho2] = post_selected_output(params, eta)?.reduced_densities()?;
    let signal = PolarizationQubit::equatorial(eta);
    Ok(FidelityPair::new(
        rho1.expectation(&signal),
        rho2.expectation(&signal),
    ))
}

/// Draws one independent Poisson count per projection setting with mean
/// `mean_total · p_setting / p_cc`.
pub fn sample_counts<R: Rng + ?Sized>(
    params: &GateParams,
    eta: f64,
    mean_total: f64,
    rng: &mut R,
) -> Result<CoincidenceCounts, ClonerError> {
    if !(mean_total > 0.0 && mean_total.is_finite()) {
        return Err(ClonerError::InvalidMeanTotal(mean_total));
    }
    let probs = coincidence_probabilities(params, eta)?;
    let total = probs.total();
    if total <= MIN_COINCIDENCE_PROBABILITY {
        return Err(ClonerError::DegeneratePostSelection { probability: total });
    }
    let mut draws = [0u64; 4];
    for (slot, p) in draws.iter_mut().zip(probs.as_array()) {
        let lambda = mean_total * p / total;
        *slot = if lambda > 0.0 {
            Poisson::new(lambda)
                .expect("positive finite rate")
                .sample(rng) as u64
        } else {
            0
        };
    }
    let [pp, po, op, oo] = draws;
    Ok(CoincidenceCounts { pp, po, op, oo })
}

/// F₁ = (cc∥∥ + cc∥⊥)/Σ, F₂ = (cc∥∥ + cc⊥∥)/Σ on raw tallies.
pub fn estimate_fidelities(counts: &CoincidenceCounts) -> Result<FidelityPair, ClonerError> {
    let sigma = counts.sigma();
    if sigma == 0 {
        return Err(ClonerError::EmptySample);
    }
    let sigma = sigma as f64;
    Ok(FidelityPair::new(
        (counts.pp + counts.po) as f64 / sigma,
        (counts.pp + counts.op) as f64 / sigma,
    ))
}
