//! Single-run pipeline: build, solve, develop, export, manifest.

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::export::{self, csv_string, write_file};
use miura_core::constraint;
use miura_core::energy::{self, EnergyModel};
use miura_core::pattern::{fold, QuadPattern};
use miura_core::qc;
use miura_core::solver::{self, SolveOutcome, SolveStatus, TraceRecord};
use miura_core::surface::{OffsetPair, SurfaceChart};
use miura_core::unfold::{self, CreaseKind, Development};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST: &str = "manifest.toml";
pub const PARAMS_INITIAL: &str = "params_initial.obj";
pub const PARAMS_OPTIMIZED: &str = "params_optimized.obj";
pub const FOLDED_INITIAL: &str = "folded_initial.obj";
pub const FOLDED: &str = "folded.obj";
pub const UNFOLDED: &str = "unfolded.obj";
pub const METRICS_CSV: &str = "metrics.csv";
pub const TRACE_CSV: &str = "trace.csv";

/// Everything a run needs, derived from the config alone.
#[derive(Clone, Debug)]
pub struct Problem {
    pub pattern: QuadPattern,
    pub pair: OffsetPair,
    pub model: EnergyModel,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let pattern = QuadPattern::build(cfg.dims()?, &cfg.footprint(), cfg.skew()?)?;
        let domain = cfg.domain();
        let fp = cfg.footprint();
        if !(domain.contains([fp.x[0], fp.y[0]]) && domain.contains([fp.x[1], fp.y[1]])) {
            return Err(CliError::Config("pattern footprint must lie inside the surface domain".into()));
        }
        let pair = OffsetPair::new(SurfaceChart::new(cfg.surface_kind()?, domain), cfg.epsilon)?;
        let model = EnergyModel::new(&pattern, &pair, cfg.weights.into())?;
        Ok(Self { pattern, pair, model })
    }
}

/// Final metrics; everything except the solver counters is recomputable from the exported meshes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub status: String,
    pub iterations: usize,
    pub stages: usize,
    pub max_planarity: f64,
    pub max_develop: f64,
    pub e_length: f64,
    pub e_mu: f64,
    pub e_center: f64,
    pub mean_mu: f64,
    pub max_mu: f64,
    /// Maximal dilation `K`.
    pub dilation: f64,
    pub foldovers: usize,
    /// Mean folded 3D edge length over the mean rest length.
    pub mean_edge_ratio: f64,
    /// Distance of the vertex centroid from the rest center, in units of `R_x`.
    pub centroid_drift: f64,
    /// Absent when the pattern could not be developed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency_error: Option<f64>,
    pub mountains: usize,
    pub valleys: usize,
}

/// Mesh-derived part of [`Metrics`] together with the development it used.
pub fn measure(problem: &Problem, y: &[[f64; 2]], positions: &[[f64; 3]], seed: usize) -> Result<(Metrics, Option<Development>)> {
    let Problem { pattern, model, .. } = problem;
    let (planar, develop) = constraint::residuals(pattern, positions)?;
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lengths = energy::edge_lengths(pattern, positions);
    let ne = lengths.len() as f64;
    let e_length = lengths
        .iter()
        .zip(&model.ref_lengths)
        .map(|(l, l0)| (l - l0).powi(2) / (2.0 * l0))
        .sum::<f64>()
        / ne;
    let mean_edge_ratio = lengths.iter().sum::<f64>() / model.ref_lengths.iter().sum::<f64>();
    let field = qc::beltrami(pattern, y)?;
    let e_mu = field.grad_coeffs.iter().map(|&c| qc::mu_sq_guarded(c)).sum::<f64>() / pattern.tris.len() as f64;
    let nv = y.len() as f64;
    let centroid = [0, 1].map(|k| y.iter().map(|p| p[k]).sum::<f64>() / nv);
    let centroid_drift = (centroid[0] - model.center[0]).hypot(centroid[1] - model.center[1]) / model.ranges[0];
    let dev = unfold::develop(positions, &pattern.quads, seed, unfold::DEFAULT_PLANARITY_GATE).ok();
    let count = |k: CreaseKind| dev.as_ref().map_or(0, |d| d.creases.iter().filter(|c| c.kind == k).count());
    let metrics = Metrics {
        status: String::new(),
        iterations: 0,
        stages: 0,
        max_planarity: inf(&planar),
        max_develop: inf(&develop),
        e_length,
        e_mu,
        e_center: energy::energy_center(y, model).value,
        mean_mu: field.mean_abs,
        max_mu: field.max_abs,
        dilation: qc::dilation(field.max_abs),
        foldovers: field.foldovers,
        mean_edge_ratio,
        centroid_drift,
        consistency_error: dev.as_ref().map(|d| d.consistency_error),
        mountains: count(CreaseKind::Mountain),
        valleys: count(CreaseKind::Valley),
    };
    Ok((metrics, dev))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub software: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run: RunInfo,
    pub config: RunConfig,
    pub metrics: Metrics,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
        toml::from_str(&text).map_err(|e| CliError::Artifact {
            path,
            msg: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

/// One row of `metrics.csv`; the header is fixed by the field order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub surface: String,
    pub rows: usize,
    pub cols: usize,
    pub quads: usize,
    pub epsilon: f64,
    pub status: String,
    pub iterations: usize,
    pub stages: usize,
    pub feas_planarity: f64,
    pub feas_develop: f64,
    #[serde(rename = "E_l")]
    pub e_length: f64,
    #[serde(rename = "E_mu")]
    pub e_mu: f64,
    #[serde(rename = "E_c")]
    pub e_center: f64,
    pub mean_mu: f64,
    pub max_mu: f64,
    pub dilation: f64,
    pub foldovers: usize,
    pub mean_edge_ratio: f64,
    pub centroid_drift: f64,
    pub consistency_error: Option<f64>,
}

impl MetricsRow {
    pub fn new(cfg: &RunConfig, pattern: &QuadPattern, m: &Metrics) -> Self {
        Self {
            surface: cfg.surface.kind.clone(),
            rows: pattern.rows,
            cols: pattern.cols,
            quads: pattern.quads.len(),
            epsilon: cfg.epsilon,
            status: m.status.clone(),
            iterations: m.iterations,
            stages: m.stages,
            feas_planarity: m.max_planarity,
            feas_develop: m.max_develop,
            e_length: m.e_length,
            e_mu: m.e_mu,
            e_center: m.e_center,
            mean_mu: m.mean_mu,
            max_mu: m.max_mu,
            dilation: m.dilation,
            foldovers: m.foldovers,
            mean_edge_ratio: m.mean_edge_ratio,
            centroid_drift: m.centroid_drift,
            consistency_error: m.consistency_error,
        }
    }
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    blend: f64,
    objective: f64,
    #[serde(rename = "E_l")]
    e_length: f64,
    #[serde(rename = "E_mu")]
    e_mu: f64,
    #[serde(rename = "E_c")]
    e_center: f64,
    max_planarity: f64,
    max_develop: f64,
    stationarity: f64,
    step: f64,
    shift: f64,
    lm_damping: f64,
}

fn trace_rows(trace: &[TraceRecord]) -> Vec<TraceRow> {
    trace
        .iter()
        .map(|r| TraceRow {
            iteration: r.iteration,
            blend: r.blend,
            objective: r.objective,
            e_length: r.energy.length,
            e_mu: r.energy.mu,
            e_center: r.energy.center,
            max_planarity: r.max_planarity,
            max_develop: r.max_develop,
            stationarity: r.stationarity,
            step: r.step,
            shift: r.shift,
            lm_damping: r.lm_damping,
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub dir: PathBuf,
    pub problem: Problem,
    pub outcome: SolveOutcome,
    pub folded: Vec<[f64; 3]>,
    pub development: Option<Development>,
    pub manifest: Manifest,
}

impl RunResult {
    pub fn status(&self) -> SolveStatus {
        self.outcome.report.status
    }

    /// Error for a non-converged solve, so the process exits with the solver code.
    pub fn check(&self) -> Result<()> {
        if self.status().is_success() {
            Ok(())
        } else {
            Err(CliError::Solver(format!(
                "solver stopped with status {} after {} iterations (artifacts in {})",
                self.status().as_str(),
                self.outcome.report.iterations,
                self.dir.display()
            )))
        }
    }
}

fn now(cfg: &RunConfig) -> Option<String> {
    (!cfg.output.reproducible).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true))
}

struct Stages {
    records: Vec<StageRecord>,
    timed: bool,
    clock: Instant,
}

impl Stages {
    fn push(&mut self, name: &str, status: &str, artifacts: &[&str]) {
        let seconds = self.timed.then(|| self.clock.elapsed().as_secs_f64());
        self.records.push(StageRecord {
            name: name.into(),
            status: status.into(),
            artifacts: artifacts.iter().map(|s| s.to_string()).collect(),
            seconds,
        });
        self.clock = Instant::now();
    }
}

/// Runs the full pipeline into `cfg.output.dir` (which must already be resolved).
///
/// Solver failures are not errors here: artifacts and manifest are still written and
/// the status is recorded; use [`RunResult::check`] to turn it into one.
pub fn execute(cfg: &RunConfig) -> Result<RunResult> {
    let started = now(cfg);
    let mut stages = Stages {
        records: Vec::new(),
        timed: !cfg.output.reproducible,
        clock: Instant::now(),
    };
    let problem = Problem::build(cfg)?;
    if cfg.output.seed_quad >= problem.pattern.quads.len() {
        return Err(CliError::Config(format!(
            "seed_quad {} out of range for {} quads",
            cfg.output.seed_quad,
            problem.pattern.quads.len()
        )));
    }
    stages.push("build", "ok", &[]);

    let outcome = solver::solve(&problem.pattern, &problem.pair, &problem.model, &cfg.solver_config())?;
    let report = &outcome.report;
    stages.push("solve", report.status.as_str(), &[TRACE_CSV]);

    let mode = cfg.exec_mode();
    let pattern = &problem.pattern;
    let folded = fold(pattern, &problem.pair, &outcome.y, mode)?.positions;
    let (mut metrics, development) = measure(&problem, &outcome.y, &folded, cfg.output.seed_quad)?;
    metrics.status = report.status.as_str().into();
    metrics.iterations = report.iterations;
    metrics.stages = report.stages;
    let developed = if development.is_some() { "ok" } else { "skipped" };
    stages.push("develop", developed, if development.is_some() { &["unfolded.obj", "unfolded.svg", "creases.csv"] } else { &[] });

    let dir = cfg.output.dir.clone();
    let folded0 = fold(pattern, &problem.pair, &pattern.vertices0, mode)?.positions;
    let put = |name: &str, text: &str| write_file(&dir.join(name), text);
    put(PARAMS_INITIAL, &export::planar_obj_string(&pattern.vertices0, &pattern.quads))?;
    put(PARAMS_OPTIMIZED, &export::planar_obj_string(&outcome.y, &pattern.quads))?;
    put(FOLDED_INITIAL, &export::obj_string(&folded0, &pattern.quads))?;
    put(FOLDED, &export::obj_string(&folded, &pattern.quads))?;
    put(
        "parameter.svg",
        &export::parameter_svg(problem.pair.domain(), &pattern.vertices0, &outcome.y, &pattern.quads, &pattern.lower_mask),
    )?;
    if let Some(dev) = &development {
        put(UNFOLDED, &export::planar_obj_string(&dev.flat_positions, &pattern.quads))?;
        put("unfolded.svg", &export::crease_svg(&dev.flat_positions, &pattern.quads, &dev.creases))?;
        put("creases.csv", &csv_string(&export::crease_rows(&dev.creases))?)?;
    }
    put(TRACE_CSV, &csv_string(&trace_rows(&report.trace))?)?;
    put(METRICS_CSV, &csv_string(&[MetricsRow::new(cfg, pattern, &metrics)])?)?;
    stages.push(
        "export",
        "ok",
        &[PARAMS_INITIAL, PARAMS_OPTIMIZED, FOLDED_INITIAL, FOLDED, "parameter.svg", METRICS_CSV],
    );

    let manifest = Manifest {
        run: RunInfo {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            started,
            finished: now(cfg),
        },
        config: cfg.clone(),
        metrics,
        stages: stages.records,
    };
    put(MANIFEST, &manifest.to_toml())?;
    Ok(RunResult {
        dir,
        problem,
        outcome,
        folded,
        development,
        manifest,
    })
}

/// Metric that disagrees between a manifest and the re-derived values.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub name: &'static str,
    pub manifest: f64,
    pub derived: f64,
}

pub const REPORT_TOL: f64 = 1e-12;

/// Re-derives the metrics of a run directory from its config and exported meshes.
pub fn rederive(dir: &Path) -> Result<(Manifest, Metrics, Vec<Mismatch>)> {
    let manifest = Manifest::load(dir)?;
    let problem = Problem::build(&manifest.config)?;
    let nv = problem.pattern.num_vertices();
    let params = export::read_obj(&dir.join(PARAMS_OPTIMIZED))?;
    let folded = export::read_obj(&dir.join(FOLDED))?;
    for (name, mesh) in [(PARAMS_OPTIMIZED, &params), (FOLDED, &folded)] {
        if mesh.positions.len() != nv || mesh.quads != problem.pattern.quads {
            return Err(CliError::Artifact {
                path: dir.join(name),
                msg: "mesh does not match the pattern described by the manifest".into(),
            });
        }
    }
    let y: Vec<[f64; 2]> = params.positions.iter().map(|p| [p[0], p[1]]).collect();
    let (mut derived, _) = measure(&problem, &y, &folded.positions, manifest.config.output.seed_quad)?;
    let m = &manifest.metrics;
    derived.status = m.status.clone();
    derived.iterations = m.iterations;
    derived.stages = m.stages;
    let pairs = [
        ("max_planarity", m.max_planarity, derived.max_planarity),
        ("max_develop", m.max_develop, derived.max_develop),
        ("e_length", m.e_length, derived.e_length),
        ("e_mu", m.e_mu, derived.e_mu),
        ("e_center", m.e_center, derived.e_center),
        ("mean_mu", m.mean_mu, derived.mean_mu),
        ("max_mu", m.max_mu, derived.max_mu),
        ("dilation", m.dilation, derived.dilation),
        ("foldovers", m.foldovers as f64, derived.foldovers as f64),
        ("mean_edge_ratio", m.mean_edge_ratio, derived.mean_edge_ratio),
        ("centroid_drift", m.centroid_drift, derived.centroid_drift),
        ("consistency_error", m.consistency_error.unwrap_or(f64::NAN), derived.consistency_error.unwrap_or(f64::NAN)),
    ];
    let mismatches = pairs
        .into_iter()
        .filter(|&(_, a, b)| {
            let same = a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= REPORT_TOL * a.abs().max(1.0);
            !same
        })
        .map(|(name, manifest, derived)| Mismatch { name, manifest, derived })
        .collect();
    Ok((manifest, derived, mismatches))
}
