//! Nelder-Mead downhill simplex minimizer for black-box (possibly noisy)
//! objectives.
//!
//! Vertices are evaluated exactly once; cached values are never refreshed, so a
//! lucky draw on a noisy objective stays in the simplex until it is replaced.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("objective returned a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimizerConfig {
    /// α > 0
    pub reflection: f64,
    /// γ > 1
    pub expansion: f64,
    /// 0 < ρ < 1
    pub contraction: f64,
    /// 0 < σ < 1
    pub shrink: f64,
    /// Stop once the largest vertex-pair distance drops below this.
    pub size_tolerance: f64,
    /// Hard cap on objective evaluations, initial simplex included.
    pub max_evaluations: usize,
    /// When set, coordinates are treated as angles with this period when
    /// measuring simplex size.
    pub period: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            size_tolerance: 1e-6,
            max_evaluations: 1000,
            period: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |msg: &str| Err(OptimizeError::InvalidConfig(msg.to_string()));
        if !(self.reflection > 0.0) {
            return bad("reflection must be > 0");
        }
        if !(self.expansion > 1.0) {
            return bad("expansion must be > 1");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        if !(self.size_tolerance > 0.0) {
            return bad("size_tolerance must be > 0");
        }
        if let Some(p) = self.period {
            if !(p > 0.0 && p.is_finite()) {
                return bad("period must be positive and finite");
            }
        }
        Ok(())
    }
}

/// Which transformation a step applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

/// N+1 vertices with their cached objective values, kept sorted from best to
/// worst.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    pub fn from_evaluated(
        vertices: Vec<Vec<f64>>,
        values: Vec<f64>,
    ) -> Result<Self, OptimizeError> {
        let n = vertices.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(OptimizeError::InvalidSimplex("zero-dimensional".into()));
        }
        if vertices.len() != n + 1 {
            return Err(OptimizeError::InvalidSimplex(format!(
                "{} vertices for a {n}-dimensional problem",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| v.len() != n) {
            return Err(OptimizeError::InvalidSimplex(
                "mixed vertex dimensions".into(),
            ));
        }
        if values.len() != vertices.len() {
            return Err(OptimizeError::InvalidSimplex(
                "one value per vertex required".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(OptimizeError::NonFinite {
                point: vertices[i].clone(),
            });
        }
        let mut s = Self { vertices, values };
        s.sort();
        Ok(s)
    }

    /// Evaluates each vertex once, in the given order.
    pub fn evaluate(
        vertices: Vec<Vec<f64>>,
        mut objective: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self, OptimizeError> {
        let mut values = Vec::with_capacity(vertices.len());
        for v in &vertices {
            values.push(checked(&mut objective, v)?);
        }
        Self::from_evaluated(vertices, values)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.vertices[0], self.values[0])
    }

    /// Largest distance between any two vertices. With a period, each
    /// coordinate difference is wrapped to its shortest representative.
    pub fn size(&self, period: Option<f64>) -> f64 {
        simplex_size(&self.vertices, period)
    }

    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    fn centroid(&self) -> Vec<f64> {
        let n = self.dim();
        let mut c = vec![0.0; n];
        for v in &self.vertices[..n] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        c.iter_mut().for_each(|ci| *ci /= n as f64);
        c
    }
}

/// Largest pairwise vertex distance; see [`Simplex::size`].
pub fn simplex_size(vertices: &[Vec<f64>], period: Option<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            let d2: f64 = a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let mut d = (x - y).abs();
                    if let Some(p) = period {
                        d = d.rem_euclid(p);
                        d = d.min(p - d);
                    }
                    d * d
                })
                .sum();
            worst = worst.max(d2.sqrt());
        }
    }
    worst
}

fn checked(objective: &mut impl FnMut(&[f64]) -> f64, point: &[f64]) -> Result<f64, OptimizeError> {
    let value = objective(point);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(OptimizeError::NonFinite {
            point: point.to_vec(),
        })
    }
}

/// `from + t·(to − from)`
fn along(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(f, x)| f + t * (x - f)).collect()
}

/// One Nelder-Mead iteration. The input simplex is left untouched; on error no
/// partial update escapes.
pub fn step(
    simplex: &Simplex,
    mut objective: impl FnMut(&[f64]) -> f64,
    cfg: &OptimizerConfig,
) -> Result<(Simplex, StepKind), OptimizeError> {
    let n = simplex.dim();
    let best = simplex.values[0];
    let second_worst = simplex.values[n - 1];
    let worst = simplex.values[n];
    let worst_point = &simplex.vertices[n];
    let centroid = simplex.centroid();

    let reflected = along(&centroid, worst_point, -cfg.reflection);
    let f_reflected = checked(&mut objective, &reflected)?;

    let replace = |point: Vec<f64>, value: f64, kind: StepKind| {
        let mut next = simplex.clone();
        next.vertices[n] = point;
        next.values[n] = value;
        next.sort();
        Ok((next, kind))
    };

    if f_reflected < best {
        let expanded = along(&centroid, &reflected, cfg.expansion);
        let f_expanded = checked(&mut objective, &expanded)?;
        return if f_expanded < f_reflected {
            replace(expanded, f_expanded, StepKind::Expand)
        } else {
            replace(reflected, f_reflected, StepKind::Reflect)
        };
    }
    if f_reflected < second_worst {
        return replace(reflected, f_reflected, StepKind::Reflect);
    }
    if f_reflected < worst {
        let contracted = along(&centroid, &reflected, cfg.contraction);
        let f_contracted = checked(&mut objective, &contracted)?;
        if f_contracted <= f_reflected {
            return replace(contracted, f_contracted, StepKind::ContractOutside);
        }
    } else {
        let contracted = along(&centroid, worst_point, cfg.contraction);
        let f_contracted = checked(&mut objective, &contracted)?;
        if f_contracted < worst {
            return replace(contracted, f_contracted, StepKind::ContractInside);
        }
    }

    let anchor = &simplex.vertices[0];
    let mut vertices = vec![anchor.clone()];
    let mut values = vec![best];
    for v in &simplex.vertices[1..] {
        let moved = along(anchor, v, cfg.shrink);
        values.push(checked(&mut objective, &moved)?);
        vertices.push(moved);
    }
    let mut next = Simplex { vertices, values };
    next.sort();
    Ok((next, StepKind::Shrink))
}

/// One objective evaluation as reported to a [`TraceSink`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// 1-based position in the evaluation sequence.
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    /// Size of the simplex being built or transformed when the point was
    /// evaluated.
    pub simplex_size: f64,
}

/// Ordered record stream fed by the optimizer.
pub trait TraceSink {
    fn evaluation(&mut self, eval: &Evaluation);

    /// Called with the starting simplex (iteration 0) and after each step.
    fn simplex(&mut self, _iteration: usize, _simplex: &Simplex) {}
}

impl TraceSink for Vec<Evaluation> {
    fn evaluation(&mut self, eval: &Evaluation) {
        self.push(eval.clone());
    }
}

/// Discards everything.
pub struct NullSink;

impl TraceSink for NullSink {
    fn evaluation(&mut self, _eval: &Evaluation) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Objective evaluations performed by this call.
    pub evaluations: usize,
    pub iterations: usize,
    /// False when the evaluation budget ran out first.
    pub converged: bool,
    pub simplex: Simplex,
}

/// Steps from an already evaluated simplex until it is smaller than
/// `cfg.size_tolerance` or another step could exceed `cfg.max_evaluations`.
pub fn run(
    initial: Simplex,
    objective: impl FnMut(&[f64]) -> f64,
    cfg: &OptimizerConfig,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome, OptimizeError> {
    run_with_budget(initial, objective, cfg, sink, 0)
}

/// Evaluates the initial vertices, then continues as [`run`]. The budget and
/// the reported evaluation count cover both phases.
pub fn minimize(
    vertices: Vec<Vec<f64>>,
    mut objective: impl FnMut(&[f64]) -> f64,
    cfg: &OptimizerConfig,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome, OptimizeError> {
    cfg.validate()?;
    if cfg.max_evaluations < vertices.len() {
        return Err(OptimizeError::InvalidConfig(format!(
            "max_evaluations {} cannot cover the {} initial vertices",
            cfg.max_evaluations,
            vertices.len()
        )));
    }
    let size = simplex_size(&vertices, cfg.period);
    let mut count = 0;
    let initial = Simplex::evaluate(vertices, |x| {
        let value = objective(x);
        count += 1;
        sink.evaluation(&Evaluation {
            index: count,
            point: x.to_vec(),
            value,
            simplex_size: size,
        });
        value
    })?;
    run_with_budget(initial, objective, cfg, sink, count)
}

fn run_with_budget(
    initial: Simplex,
    mut objective: impl FnMut(&[f64]) -> f64,
    cfg: &OptimizerConfig,
    sink: &mut dyn TraceSink,
    already_spent: usize,
) -> Result<RunOutcome, OptimizeError> {
    cfg.validate()?;
    let n = initial.dim();
    // reflection + contraction + n shrink evaluations
    let worst_case_step = n + 2;
    let mut evaluations = already_spent;
    let mut iterations = 0;
    let mut simplex = initial;
    sink.simplex(0, &simplex);

    let converged = loop {
        let size = simplex.size(cfg.period);
        if size < cfg.size_tolerance {
            break true;
        }
        if evaluations + worst_case_step > cfg.max_evaluations {
            break false;
        }
        let (next, _) = step(
            &simplex,
            |x| {
                let value = objective(x);
                evaluations += 1;
                sink.evaluation(&Evaluation {
                    index: evaluations,
                    point: x.to_vec(),
                    value,
                    simplex_size: size,
                });
                value
            },
            cfg,
        )?;
        simplex = next;
        iterations += 1;
        sink.simplex(iterations, &simplex);
    };

    let (best_point, best_value) = simplex.best();
    Ok(RunOutcome {
        best_point: best_point.to_vec(),
        best_value,
        evaluations,
        iterations,
        converged,
        simplex,
    })
}
