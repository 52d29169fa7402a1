//! Experiment configuration file (TOML) and its resolution against flags.
//!
//! ```toml
//! [experiment]
//! model = 1                  # 1 = (φ, θ), 2 = (φ, θ, ω)
//! noise = "exact"            # "exact" or "shot"
//! seed = 7
//! mean_total_counts = 400.0
//! fixed_omega_deg = 0.0      # model 1 only
//! test_set_size = 40
//! initial_simplex = [[22.5, 22.5], [32.5, 22.5], [22.5, 32.5]]
//!
//! [optimizer]
//! reflection = 1.0
//! expansion = 2.0
//! contraction = 0.5
//! shrink = 0.5
//! size_tolerance_deg = 0.1
//! max_evaluations = 200
//!
//! [output]
//! dir = "runs/model1"
//! ```
//!
//! Every key is optional. Flags override the file, the file overrides the
//! built-in defaults of the chosen model and noise mode.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qcloner_core::trainer::{ExperimentConfig, Model, NoiseMode};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub model: Option<u8>,
    pub noise: Option<NoiseMode>,
    pub seed: Option<u64>,
    pub mean_total_counts: Option<f64>,
    pub fixed_omega_deg: Option<f64>,
    pub test_set_size: Option<usize>,
    pub initial_simplex: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub reflection: Option<f64>,
    pub expansion: Option<f64>,
    pub contraction: Option<f64>,
    pub shrink: Option<f64>,
    pub size_tolerance_deg: Option<f64>,
    pub max_evaluations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("malformed config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

pub fn parse_model(n: u8) -> Result<Model> {
    match n {
        1 => Ok(Model::TwoParam),
        2 => Ok(Model::ThreeParam),
        other => bail!("model must be 1 or 2, got {other}"),
    }
}

pub fn model_number(model: Model) -> u8 {
    match model {
        Model::TwoParam => 1,
        Model::ThreeParam => 2,
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub model: Option<u8>,
    pub noise: Option<NoiseMode>,
    pub seed: Option<u64>,
    pub mean_total_counts: Option<f64>,
    pub fixed_omega_deg: Option<f64>,
    pub max_evaluations: Option<usize>,
    pub test_set_size: Option<usize>,
}

pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<ExperimentConfig> {
    let exp = &file.experiment;
    let model = parse_model(flags.model.or(exp.model).unwrap_or(1))?;
    let noise = flags.noise.or(exp.noise).unwrap_or(NoiseMode::Exact);

    let mut cfg = ExperimentConfig::new(model, noise);
    if let Some(v) = flags.seed.or(exp.seed) {
        cfg.seed = v;
    }
    if let Some(v) = flags.mean_total_counts.or(exp.mean_total_counts) {
        cfg.mean_total_counts = v;
    }
    if let Some(v) = flags.fixed_omega_deg.or(exp.fixed_omega_deg) {
        cfg.fixed_omega_deg = v;
    }
    if let Some(v) = flags.test_set_size.or(exp.test_set_size) {
        cfg.test_set_size = v;
    }
    if let Some(v) = &exp.initial_simplex {
        cfg.initial_simplex = v.clone();
    }

    let opt = &file.optimizer;
    let o = &mut cfg.optimizer;
    if let Some(v) = opt.reflection {
        o.reflection = v;
    }
    if let Some(v) = opt.expansion {
        o.expansion = v;
    }
    if let Some(v) = opt.contraction {
        o.contraction = v;
    }
    if let Some(v) = opt.shrink {
        o.shrink = v;
    }
    if let Some(v) = opt.size_tolerance_deg {
        o.size_tolerance = v;
    }
    if let Some(v) = flags.max_evaluations.or(opt.max_evaluations) {
        o.max_evaluations = v;
    }

    cfg.validate()?;
    Ok(cfg)
}
