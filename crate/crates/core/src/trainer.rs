//! Online training of the cloner: the cost function, the Nelder-Mead loop over
//! freshly drawn equatorial states, test-set evaluation and landscape scans.
//!
//! Parameter points handed to the optimizer are in degrees; signal phases are
//! radians.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloner::{self, ClonerError, CoincidenceCounts, FidelityPair};
use crate::optics::GateParams;
use crate::optimize::{self, Evaluation, OptimizeError, OptimizerConfig, Simplex, TraceSink};

/// Half-wave-plate period in degrees, used for simplex size.
pub const ANGLE_PERIOD_DEG: f64 = 180.0;

/// Phases used when averaging over the equatorial family.
pub const DEFAULT_ETA_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Cloner(#[from] ClonerError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// φ and θ are trained; the ancilla is fixed.
    TwoParam,
    /// φ, θ and the ancilla angle ω are trained.
    ThreeParam,
}

impl Model {
    pub fn dim(self) -> usize {
        match self {
            Model::TwoParam => 2,
            Model::ThreeParam => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Fidelities from exact probabilities.
    Exact,
    /// Fidelities estimated from Poisson-sampled coincidence counts.
    Shot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub noise: NoiseMode,
    /// Ancilla angle for [`Model::TwoParam`], degrees.
    pub fixed_omega_deg: f64,
    /// Starting vertices in degrees: (φ, θ) or (φ, θ, ω).
    pub initial_simplex: Vec<Vec<f64>>,
    /// Expected total coincidences per run in shot mode.
    pub mean_total_counts: f64,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub test_set_size: usize,
}

impl ExperimentConfig {
    pub fn new(model: Model, noise: NoiseMode) -> Self {
        let initial_simplex = match model {
            Model::TwoParam => vec![vec![22.5, 22.5], vec![32.5, 22.5], vec![22.5, 32.5]],
            Model::ThreeParam => vec![
                vec![22.5, 22.5, 22.5],
                vec![42.5, 22.5, 22.5],
                vec![22.5, 42.5, 22.5],
                vec![22.5, 22.5, 42.5],
            ],
        };
        let max_evaluations = match noise {
            NoiseMode::Exact => 200,
            NoiseMode::Shot => 120,
        };
        Self {
            model,
            noise,
            fixed_omega_deg: 0.0,
            initial_simplex,
            mean_total_counts: 400.0,
            seed: 0,
            optimizer: OptimizerConfig {
                size_tolerance: 0.1,
                max_evaluations,
                period: Some(ANGLE_PERIOD_DEG),
                ..OptimizerConfig::default()
            },
            test_set_size: 40,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let dim = self.model.dim();
        if self.initial_simplex.len() != dim + 1 {
            return Err(TrainError::InvalidConfig(format!(
                "{:?} needs {} initial vertices, got {}",
                self.model,
                dim + 1,
                self.initial_simplex.len()
            )));
        }
        if let Some(v) = self.initial_simplex.iter().find(|v| v.len() != dim) {
            return Err(TrainError::InvalidConfig(format!(
                "vertex {v:?} should have {dim} coordinates"
            )));
        }
        if self
            .initial_simplex
            .iter()
            .flatten()
            .any(|x| !x.is_finite())
        {
            return Err(TrainError::InvalidConfig(
                "non-finite vertex coordinate".into(),
            ));
        }
        if !self.fixed_omega_deg.is_finite() {
            return Err(TrainError::InvalidConfig(
                "fixed_omega_deg must be finite".into(),
            ));
        }
        if !(self.mean_total_counts > 0.0 && self.mean_total_counts.is_finite()) {
            return Err(TrainError::InvalidConfig(
                "mean_total_counts must be positive".into(),
            ));
        }
        if self.test_set_size == 0 {
            return Err(TrainError::InvalidConfig(
                "test_set_size must be at least 1".into(),
            ));
        }
        self.optimizer.validate()?;
        Ok(())
    }

    /// Gate parameters for an optimizer point in degrees.
    pub fn params_at(&self, point_deg: &[f64]) -> GateParams {
        let omega = match self.model {
            Model::TwoParam => self.fixed_omega_deg,
            Model::ThreeParam => point_deg[2],
        };
        GateParams::from_degrees(point_deg[0], point_deg[1], omega)
    }
}

/// C = (1 − F₁)² + (1 − F₂)² + (F₁ − F₂)²
pub fn cost(f: &FidelityPair) -> f64 {
    (1.0 - f.f1).powi(2) + (1.0 - f.f2).powi(2) + (f.f1 - f.f2).powi(2)
}

/// Fidelities for one signal phase under the chosen noise model.
pub fn measure<R: Rng + ?Sized>(
    params: &GateParams,
    eta: f64,
    noise: NoiseMode,
    mean_total_counts: f64,
    rng: &mut R,
) -> Result<(FidelityPair, Option<CoincidenceCounts>), ClonerError> {
    match noise {
        NoiseMode::Exact => Ok((cloner::exact_fidelities(params, eta)?, None)),
        NoiseMode::Shot => {
            let counts = cloner::sample_counts(params, eta, mean_total_counts, rng)?;
            Ok((cloner::estimate_fidelities(&counts)?, Some(counts)))
        }
    }
}

/// Outcome of a single gate run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSample {
    pub params: GateParams,
    pub eta: f64,
    pub fidelities: FidelityPair,
    pub cost: f64,
    pub counts: Option<CoincidenceCounts>,
}

/// One gate run: draws η uniformly on [0, 2π), measures both clones and
/// returns the cost.
pub fn objective<R: Rng + ?Sized>(
    point_deg: &[f64],
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<RunSample, TrainError> {
    if point_deg.len() != cfg.model.dim() {
        return Err(TrainError::InvalidConfig(format!(
            "point has {} coordinates, model expects {}",
            point_deg.len(),
            cfg.model.dim()
        )));
    }
    let params = cfg.params_at(point_deg);
    let eta = rng.random_range(0.0..TAU);
    let (fidelities, counts) = measure(&params, eta, cfg.noise, cfg.mean_total_counts, rng)?;
    Ok(RunSample {
        params,
        eta,
        fidelities,
        cost: cost(&fidelities),
        counts,
    })
}

/// One line of the learning trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub omega_deg: f64,
    pub eta_rad: f64,
    pub f1: f64,
    pub f2: f64,
    pub cost: f64,
    pub simplex_size_deg: f64,
}

/// Simplex vertices after an optimizer iteration (0 = starting simplex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSnapshot {
    pub iteration: usize,
    pub vertices: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    /// Best optimizer vertex, degrees.
    pub best_point_deg: Vec<f64>,
    /// (φ, θ, ω) in degrees at the best vertex.
    pub params_deg: [f64; 3],
    /// Cached (possibly noisy) cost of the best vertex.
    pub best_cost: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub iterations: usize,
    /// Noise-free fidelities at the best vertex, averaged over η.
    pub exact_fidelities: FidelityPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningTrace {
    pub runs: Vec<RunRecord>,
    pub simplices: Vec<SimplexSnapshot>,
    pub final_state: FinalState,
}

#[derive(Default)]
struct Collector {
    evaluations: Vec<Evaluation>,
    simplices: Vec<SimplexSnapshot>,
}

impl TraceSink for Collector {
    fn evaluation(&mut self, eval: &Evaluation) {
        self.evaluations.push(eval.clone());
    }

    fn simplex(&mut self, iteration: usize, simplex: &Simplex) {
        self.simplices.push(SimplexSnapshot {
            iteration,
            vertices: simplex.vertices().to_vec(),
            values: simplex.values().to_vec(),
        });
    }
}

/// Generator for the training runs of `seed`.
pub fn training_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for test-set draws of `seed`; a separate stream from training.
pub fn test_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs the online training loop to convergence or budget exhaustion.
pub fn train(cfg: &ExperimentConfig) -> Result<LearningTrace, TrainError> {
    cfg.validate()?;
    let mut rng = training_rng(cfg.seed);
    let mut samples: Vec<RunSample> = Vec::new();
    let mut failure: Option<TrainError> = None;
    let mut collector = Collector::default();

    let result = optimize::minimize(
        cfg.initial_simplex.clone(),
        |point| match objective(point, cfg, &mut rng) {
            Ok(sample) => {
                samples.push(sample);
                sample.cost
            }
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        &cfg.optimizer,
        &mut collector,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outcome = result?;
    debug_assert_eq!(samples.len(), collector.evaluations.len());

    let runs = samples
        .iter()
        .zip(&collector.evaluations)
        .map(|(s, e)| {
            let [phi_deg, theta_deg, omega_deg] = s.params.to_degrees();
            RunRecord {
                run: e.index,
                phi_deg,
                theta_deg,
                omega_deg,
                eta_rad: s.eta,
                f1: s.fidelities.f1,
                f2: s.fidelities.f2,
                cost: s.cost,
                simplex_size_deg: e.simplex_size,
            }
        })
        .collect();

    let best = cfg.params_at(&outcome.best_point);
    let final_state = FinalState {
        best_point_deg: outcome.best_point.clone(),
        params_deg: best.to_degrees(),
        best_cost: outcome.best_value,
        converged: outcome.converged,
        evaluations: outcome.evaluations,
        iterations: outcome.iterations,
        exact_fidelities: eta_averaged_fidelities(&best, DEFAULT_ETA_SAMPLES)?.0,
    };
    Ok(LearningTrace {
        runs,
        simplices: collector.simplices,
        final_state,
    })
}

/// Exact fidelities and cost averaged over `samples` evenly spaced phases
/// (cell midpoints, which keeps η = 0 off the grid).
/// For an eigen-ancilla (|H⟩ or |V⟩) the result does not depend on η and a
/// single phase is used.
pub fn eta_averaged_fidelities(
    params: &GateParams,
    samples: usize,
) -> Result<(FidelityPair, f64), ClonerError> {
    let samples = if is_eigen_ancilla(params.omega) {
        1
    } else {
        samples.max(1)
    };
    let (mut f1, mut f2, mut c) = (0.0, 0.0, 0.0);
    for k in 0..samples {
        let eta = TAU * (k as f64 + 0.5) / samples as f64;
        let f = cloner::exact_fidelities(params, eta)?;
        f1 += f.f1;
        f2 += f.f2;
        c += cost(&f);
    }
    let n = samples as f64;
    Ok((FidelityPair::new(f1 / n, f2 / n), c / n))
}

/// True when cos 2ω|H⟩ + sin 2ω|V⟩ is ±|H⟩ or ±|V⟩.
pub fn is_eigen_ancilla(omega: f64) -> bool {
    (4.0 * omega).sin().abs() < 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub size: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub mean_f2: f64,
    pub std_f2: f64,
    /// Set when the set has a single instance and the spreads are reported as 0.
    pub degenerate_spread: bool,
}

/// Fidelity statistics over `cfg.test_set_size` fresh random phases. Spreads
/// are sample standard deviations.
pub fn evaluate_test_set<R: Rng + ?Sized>(
    params: &GateParams,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<TestSummary, TrainError> {
    if cfg.test_set_size == 0 {
        return Err(TrainError::InvalidConfig(
            "test_set_size must be at least 1".into(),
        ));
    }
    let mut f1s = Vec::with_capacity(cfg.test_set_size);
    let mut f2s = Vec::with_capacity(cfg.test_set_size);
    for _ in 0..cfg.test_set_size {
        let eta = rng.random_range(0.0..TAU);
        let (f, _) = measure(params, eta, cfg.noise, cfg.mean_total_counts, rng)?;
        f1s.push(f.f1);
        f2s.push(f.f2);
    }
    let (mean_f1, std_f1) = mean_std(&f1s);
    let (mean_f2, std_f2) = mean_std(&f2s);
    Ok(TestSummary {
        size: cfg.test_set_size,
        mean_f1,
        std_f1,
        mean_f2,
        std_f2,
        degenerate_spread: cfg.test_set_size == 1,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Evenly spaced axis from `start_deg` to `end_deg` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub start_deg: f64,
    pub end_deg: f64,
    pub points: usize,
}

impl AxisRange {
    pub fn new(start_deg: f64, end_deg: f64, points: usize) -> Self {
        Self {
            start_deg,
            end_deg,
            points,
        }
    }

    /// Axis with spacing `step_deg`, rounding the point count to the nearest
    /// whole number of steps.
    pub fn with_step(start_deg: f64, end_deg: f64, step_deg: f64) -> Self {
        let points = ((end_deg - start_deg) / step_deg).round() as usize + 1;
        Self::new(start_deg, end_deg, points)
    }

    fn validate(&self, name: &str) -> Result<(), TrainError> {
        if self.points < 2 {
            return Err(TrainError::InvalidConfig(format!(
                "{name} axis needs at least 2 points"
            )));
        }
        if !(self.start_deg.is_finite() && self.end_deg.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "{name} range must be finite"
            )));
        }
        if self.end_deg <= self.start_deg {
            return Err(TrainError::InvalidConfig(format!(
                "{name} range {}..{} is empty or inverted",
                self.start_deg, self.end_deg
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.end_deg - self.start_deg) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end_deg
                } else {
                    self.start_deg + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCell {
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub f1: f64,
    pub f2: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub omega_deg: f64,
    pub phi_deg: Vec<f64>,
    pub theta_deg: Vec<f64>,
    /// Row-major: φ outer, θ inner.
    pub cells: Vec<LandscapeCell>,
    /// Cell with the lowest cost.
    pub minimum: LandscapeCell,
    /// Cell with the largest min(F₁, F₂).
    pub best_symmetric: LandscapeCell,
}

impl Landscape {
    pub fn cell(&self, phi_index: usize, theta_index: usize) -> &LandscapeCell {
        &self.cells[phi_index * self.theta_deg.len() + theta_index]
    }
}

/// Exact cost over a (φ, θ) grid at fixed ancilla angle, η-averaged with
/// `eta_samples` phases unless the ancilla is an eigenstate.
pub fn scan_landscape(
    phi: AxisRange,
    theta: AxisRange,
    omega_deg: f64,
    eta_samples: usize,
) -> Result<Landscape, TrainError> {
    phi.validate("phi")?;
    theta.validate("theta")?;
    if eta_samples == 0 {
        return Err(TrainError::InvalidConfig(
            "eta_samples must be at least 1".into(),
        ));
    }
    let phis = phi.values();
    let thetas = theta.values();
    let rows: Result<Vec<Vec<LandscapeCell>>, ClonerError> = phis
        .par_iter()
        .map(|&p| {
            thetas
                .iter()
                .map(|&t| {
                    let params = GateParams::from_degrees(p, t, omega_deg);
                    let (f, c) = eta_averaged_fidelities(&params, eta_samples)?;
                    Ok(LandscapeCell {
                        phi_deg: p,
                        theta_deg: t,
                        f1: f.f1,
                        f2: f.f2,
                        cost: c,
                    })
                })
                .collect()
        })
        .collect();
    let cells: Vec<LandscapeCell> = rows?.into_iter().flatten().collect();

    let minimum = *cells
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("non-empty grid");
    let best_symmetric = *cells
        .iter()
        .max_by(|a, b| a.f1.min(a.f2).total_cmp(&b.f1.min(b.f2)))
        .expect("non-empty grid");
    Ok(Landscape {
        omega_deg,
        phi_deg: phis,
        theta_deg: thetas,
        cells,
        minimum,
        best_symmetric,
    })
}
