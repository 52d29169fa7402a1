//! File formats: trace, simplex and grid CSVs, the JSON summary and manifest,
//! and the complex-matrix CSV read by `permanent`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use qcloner_core::trainer::{
    ExperimentConfig, Landscape, LearningTrace, SimplexSnapshot, TestSummary,
};
use qcloner_core::ComplexMatrix;
use serde::{Deserialize, Serialize};

pub const TRACE_FILE: &str = "trace.csv";
pub const SIMPLEX_FILE: &str = "simplices.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

/// One row per gate run, columns in [`qcloner_core::trainer::RunRecord`] order.
pub fn write_trace(path: &Path, trace: &LearningTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for record in &trace.runs {
        w.serialize(record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexRow {
    pub iteration: usize,
    pub vertex: usize,
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub omega_deg: f64,
    pub cost: f64,
}

fn simplex_rows(cfg: &ExperimentConfig, snapshot: &SimplexSnapshot) -> Vec<SimplexRow> {
    snapshot
        .vertices
        .iter()
        .zip(&snapshot.values)
        .enumerate()
        .map(|(vertex, (point, &cost))| {
            let [phi_deg, theta_deg, omega_deg] = cfg.params_at(point).to_degrees();
            SimplexRow {
                iteration: snapshot.iteration,
                vertex,
                phi_deg,
                theta_deg,
                omega_deg,
                cost,
            }
        })
        .collect()
}

/// Vertices of every simplex the optimizer held, for triangle overlays.
pub fn write_simplices(path: &Path, cfg: &ExperimentConfig, trace: &LearningTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for snapshot in &trace.simplices {
        for row in simplex_rows(cfg, snapshot) {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_simplices(path: &Path) -> Result<Vec<SimplexRow>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let rows = r
        .deserialize()
        .collect::<Result<Vec<SimplexRow>, _>>()
        .with_context(|| format!("malformed simplex file {}", path.display()))?;
    Ok(rows)
}

#[derive(Debug, Serialize)]
struct GridRow {
    phi_deg: f64,
    theta_deg: f64,
    cost: f64,
}

pub fn write_grid(path: &Path, landscape: &Landscape) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for c in &landscape.cells {
        w.serialize(GridRow {
            phi_deg: c.phi_deg,
            theta_deg: c.theta_deg,
            cost: c.cost,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_overlay(path: &Path, rows: &[SimplexRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalParams {
    pub phi_deg: f64,
    pub theta_deg: f64,
    pub omega_deg: f64,
}

impl From<[f64; 3]> for FinalParams {
    fn from([phi_deg, theta_deg, omega_deg]: [f64; 3]) -> Self {
        Self {
            phi_deg,
            theta_deg,
            omega_deg,
        }
    }
}

/// Result of a training run, evaluated on a fresh test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub final_params: FinalParams,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub mean_f2: f64,
    pub std_f2: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub iterations: usize,
    pub best_cost: f64,
    pub test_set_size: usize,
}

impl Summary {
    pub fn new(trace: &LearningTrace, test: &TestSummary) -> Self {
        let f = &trace.final_state;
        Self {
            final_params: f.params_deg.into(),
            mean_f1: test.mean_f1,
            std_f1: test.std_f1,
            mean_f2: test.mean_f2,
            std_f2: test.std_f2,
            converged: f.converged,
            evaluations: f.evaluations,
            iterations: f.iterations,
            best_cost: f.best_cost,
            test_set_size: test.size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub trace: PathBuf,
    pub simplices: PathBuf,
    pub summary: PathBuf,
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub tool_version: String,
    pub timestamp: String,
    pub seed: u64,
    pub outputs: Outputs,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Parses a square complex matrix: one matrix row per line, written as
/// `re,im` pairs (`re0,im0,re1,im1,...`). Blank lines and lines starting with
/// `#` are ignored.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.len() % 2 != 0 {
            bail!(
                "line {line}: expected re,im pairs but found {} values",
                record.len()
            );
        }
        let values = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .with_context(|| format!("line {line}: cannot parse {s:?} as a number"))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(
            values
                .chunks(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        );
    }
    if rows.is_empty() {
        bail!("matrix file is empty");
    }
    let m = ComplexMatrix::from_rows(rows)?;
    if !m.is_square() {
        bail!(
            "matrix is {}x{}, expected a square matrix",
            m.rows(),
            m.cols()
        );
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("malformed matrix file {}", path.display()))
}
