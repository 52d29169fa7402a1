use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use qcloner_core::fock::permanent;
use qcloner_core::trainer::{
    self, evaluate_test_set, scan_landscape, test_rng, train, AxisRange, ExperimentConfig,
    LearningTrace, NoiseMode, DEFAULT_ETA_SAMPLES,
};
use qcloner_core::GateParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, ConfigFile, Overrides};
use crate::io::{self, Manifest, Outputs, Summary};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    Exact,
    Shot,
}

impl From<Noise> for NoiseMode {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Exact => NoiseMode::Exact,
            Noise::Shot => NoiseMode::Shot,
        }
    }
}

/// `start:end` in degrees.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START:END, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("{v:?} is not a number: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// 1 trains (φ, θ) with a fixed ancilla, 2 also trains the ancilla angle ω.
    #[arg(long)]
    pub model: Option<u8>,
    #[arg(long, value_enum)]
    pub noise: Option<Noise>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Expected total coincidences per run (shot noise).
    #[arg(long)]
    pub counts: Option<f64>,
    /// Fixed ancilla angle for model 1, degrees.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Budget of gate runs.
    #[arg(long)]
    pub max_evals: Option<usize>,
    /// Size of the test set evaluated after training.
    #[arg(long)]
    pub test_size: Option<usize>,
    /// Output directory (default: `output.dir` from the config, else `qcloner-out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl TrainArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model,
            noise: self.noise.map(Into::into),
            seed: self.seed,
            mean_total_counts: self.counts,
            fixed_omega_deg: self.omega,
            max_evaluations: self.max_evals,
            test_set_size: self.test_size,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn run_training(cfg: &ExperimentConfig) -> Result<(LearningTrace, Summary)> {
    let trace = train(cfg)?;
    let best = GateParams::from_degrees(
        trace.final_state.params_deg[0],
        trace.final_state.params_deg[1],
        trace.final_state.params_deg[2],
    );
    let test = evaluate_test_set(&best, cfg, &mut test_rng(cfg.seed))?;
    let summary = Summary::new(&trace, &test);
    Ok((trace, summary))
}

pub fn train_cmd(args: &TrainArgs) -> Result<Status> {
    let file = load_config(args.config.as_deref())?;
    let cfg = config::resolve(&file, &args.overrides())?;
    let out = args
        .out
        .clone()
        .or_else(|| file.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("qcloner-out"));

    let (trace, summary) = run_training(&cfg)?;

    let outputs = Outputs {
        trace: out.join(io::TRACE_FILE),
        simplices: out.join(io::SIMPLEX_FILE),
        summary: out.join(io::SUMMARY_FILE),
    };
    io::write_trace(&outputs.trace, &trace)?;
    io::write_simplices(&outputs.simplices, &cfg, &trace)?;
    io::write_json(&outputs.summary, &summary)?;
    let manifest = Manifest {
        config: cfg.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        seed: cfg.seed,
        outputs,
    };
    io::write_json(&out.join(io::MANIFEST_FILE), &manifest)?;

    let p = &summary.final_params;
    let exact = &trace.final_state.exact_fidelities;
    println!(
        "model {} ({:?} noise), seed {}",
        config::model_number(cfg.model),
        cfg.noise,
        cfg.seed
    );
    println!(
        "{} after {} runs ({} iterations)",
        if summary.converged {
            "converged"
        } else {
            "budget exhausted"
        },
        summary.evaluations,
        summary.iterations
    );
    println!(
        "final angles: phi = {:.3} deg, theta = {:.3} deg, omega = {:.3} deg",
        p.phi_deg, p.theta_deg, p.omega_deg
    );
    println!(
        "noise-free fidelities: F1 = {:.4}, F2 = {:.4}",
        exact.f1, exact.f2
    );
    println!(
        "test set ({}): F1 = {:.4} ± {:.4}, F2 = {:.4} ± {:.4}",
        summary.test_set_size, summary.mean_f1, summary.std_f1, summary.mean_f2, summary.std_f2
    );
    println!("wrote {}", out.display());

    Ok(if summary.converged {
        Status::Ok
    } else {
        Status::NotConverged
    })
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// φ range in degrees, START:END.
    #[arg(long, value_parser = parse_range, default_value = "0:90")]
    pub phi: (f64, f64),
    /// θ range in degrees, START:END.
    #[arg(long, value_parser = parse_range, default_value = "0:90")]
    pub theta: (f64, f64),
    /// Grid points per axis (at least 2).
    #[arg(long, conflicts_with = "step")]
    pub resolution: Option<usize>,
    /// Grid spacing in degrees, as an alternative to --resolution (default 1).
    #[arg(long)]
    pub step: Option<f64>,
    /// Ancilla angle, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub omega: f64,
    /// Signal phases averaged per cell for a non-eigenstate ancilla.
    #[arg(long, default_value_t = DEFAULT_ETA_SAMPLES)]
    pub eta_samples: usize,
    /// Grid CSV to write.
    #[arg(long, default_value = "grid.csv")]
    pub out: PathBuf,
    /// Simplex file from `train`; its final simplex is exported for overlay.
    #[arg(long)]
    pub simplices: Option<PathBuf>,
    /// Where to write the overlay (default: next to the grid, `_overlay.csv`).
    #[arg(long, requires = "simplices")]
    pub overlay_out: Option<PathBuf>,
}

fn axis(name: &str, (start, end): (f64, f64), args: &ScanArgs) -> Result<AxisRange> {
    match (args.resolution, args.step) {
        (Some(n), _) => Ok(AxisRange::new(start, end, n)),
        (None, Some(step)) => axis_with_step(name, start, end, step),
        (None, None) => axis_with_step(name, start, end, 1.0),
    }
}

fn axis_with_step(name: &str, start: f64, end: f64, step: f64) -> Result<AxisRange> {
    if !(step > 0.0 && step.is_finite()) {
        bail!("--step must be positive");
    }
    if end <= start {
        bail!("{name} range {start}:{end} is empty or inverted");
    }
    Ok(AxisRange::with_step(start, end, step))
}

/// Moves `x` by whole periods into `[lo, lo + period)` when that lands it
/// inside the scanned window.
fn fold_into(x: f64, lo: f64, hi: f64) -> f64 {
    let period = trainer::ANGLE_PERIOD_DEG;
    let folded = lo + (x - lo).rem_euclid(period);
    if folded <= hi {
        folded
    } else {
        x
    }
}

pub fn scan_cmd(args: &ScanArgs) -> Result<Status> {
    let phi = axis("phi", args.phi, args)?;
    let theta = axis("theta", args.theta, args)?;
    let landscape = scan_landscape(phi, theta, args.omega, args.eta_samples)?;
    io::write_grid(&args.out, &landscape)?;

    let m = &landscape.minimum;
    println!(
        "{}x{} grid at omega = {} deg written to {}",
        phi.points,
        theta.points,
        args.omega,
        args.out.display()
    );
    println!(
        "minimum cost {:.6} at phi = {:.3} deg, theta = {:.3} deg (F1 = {:.4}, F2 = {:.4})",
        m.cost, m.phi_deg, m.theta_deg, m.f1, m.f2
    );

    if let Some(src) = &args.simplices {
        let rows = io::read_simplices(src)?;
        let Some(last) = rows.iter().map(|r| r.iteration).max() else {
            bail!("simplex file {} has no rows", src.display());
        };
        let overlay: Vec<_> = rows
            .into_iter()
            .filter(|r| r.iteration == last)
            .map(|mut r| {
                r.phi_deg = fold_into(r.phi_deg, args.phi.0, args.phi.1);
                r.theta_deg = fold_into(r.theta_deg, args.theta.0, args.theta.1);
                r
            })
            .collect();
        let path = args.overlay_out.clone().unwrap_or_else(|| {
            let stem = args
                .out
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("grid");
            args.out.with_file_name(format!("{stem}_overlay.csv"))
        });
        io::write_overlay(&path, &overlay)?;
        println!(
            "final simplex (iteration {last}) written to {}",
            path.display()
        );
    }
    Ok(Status::Ok)
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Beam-splitter angle φ, degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    /// Beam-splitter angle θ, degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Ancilla angle ω, degrees (required unless --model 1).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// With 1, ω defaults to the model-1 ancilla (0 deg).
    #[arg(long)]
    pub model: Option<u8>,
    #[arg(long, value_enum, default_value = "exact")]
    pub noise: Noise,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random signal phases.
    #[arg(long, default_value_t = 40)]
    pub size: usize,
    /// Expected total coincidences per run (shot noise).
    #[arg(long, default_value_t = 400.0)]
    pub counts: f64,
    /// Print the result as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
struct TestReport {
    phi_deg: f64,
    theta_deg: f64,
    omega_deg: f64,
    noise: NoiseMode,
    seed: u64,
    #[serde(flatten)]
    summary: trainer::TestSummary,
}

pub fn test_cmd(args: &TestArgs) -> Result<Status> {
    let model = config::parse_model(args.model.unwrap_or(2))?;
    let mut cfg = ExperimentConfig::new(model, args.noise.into());
    let omega = match (args.omega, args.model) {
        (Some(w), _) => w,
        (None, Some(1)) => cfg.fixed_omega_deg,
        (None, _) => bail!("--omega is required unless --model 1 is given"),
    };
    cfg.seed = args.seed;
    cfg.test_set_size = args.size;
    cfg.mean_total_counts = args.counts;
    cfg.validate()?;

    let params = GateParams::from_degrees(args.phi, args.theta, omega);
    let summary = evaluate_test_set(&params, &cfg, &mut test_rng(cfg.seed))?;
    if args.json {
        let report = TestReport {
            phi_deg: args.phi,
            theta_deg: args.theta,
            omega_deg: omega,
            noise: cfg.noise,
            seed: cfg.seed,
            summary,
        };
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "F1 = {:.4} ± {:.4}\nF2 = {:.4} ± {:.4}",
            summary.mean_f1, summary.std_f1, summary.mean_f2, summary.std_f2
        );
        if summary.degenerate_spread {
            println!("(single test instance: spreads not defined)");
        }
    }
    Ok(Status::Ok)
}

#[derive(Debug, Args)]
pub struct PermanentArgs {
    /// Matrix CSV: one row per line as re,im pairs.
    pub file: PathBuf,
}

pub fn permanent_cmd(args: &PermanentArgs) -> Result<Status> {
    let m = io::read_matrix(&args.file)?;
    let p = permanent(&m)?;
    // shortest representation that parses back to the same f64
    println!("permanent = ({}, {})", p.re, p.im);
    println!("|permanent|^2 = {}", p.norm_sqr());
    Ok(Status::Ok)
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<u8>,
    #[arg(long, value_enum)]
    pub noise: Option<Noise>,
    /// First seed; run i uses base + i.
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
    /// Number of runs.
    #[arg(long, default_value_t = 20)]
    pub runs: u64,
    #[arg(long)]
    pub counts: Option<f64>,
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    seed: u64,
    converged: bool,
    evaluations: usize,
    phi_deg: f64,
    theta_deg: f64,
    omega_deg: f64,
    best_cost: f64,
    mean_f1: f64,
    std_f1: f64,
    mean_f2: f64,
    std_f2: f64,
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<Status> {
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let file = load_config(args.config.as_deref())?;
    let base = config::resolve(
        &file,
        &Overrides {
            model: args.model,
            noise: args.noise.map(Into::into),
            mean_total_counts: args.counts,
            max_evaluations: args.max_evals,
            ..Overrides::default()
        },
    )?;
    let rows = (0..args.runs)
        .into_par_iter()
        .map(|i| {
            let mut cfg = base.clone();
            cfg.seed = args.base_seed + i;
            let (_, s) = run_training(&cfg)?;
            Ok(SweepRow {
                seed: cfg.seed,
                converged: s.converged,
                evaluations: s.evaluations,
                phi_deg: s.final_params.phi_deg,
                theta_deg: s.final_params.theta_deg,
                omega_deg: s.final_params.omega_deg,
                best_cost: s.best_cost,
                mean_f1: s.mean_f1,
                std_f1: s.std_f1,
                mean_f2: s.mean_f2,
                std_f2: s.std_f2,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(&args.out)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;

    let converged = rows.iter().filter(|r| r.converged).count();
    println!(
        "{converged}/{} runs converged; results in {}",
        rows.len(),
        args.out.display()
    );
    Ok(Status::Ok)
}
