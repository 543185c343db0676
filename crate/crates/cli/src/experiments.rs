//! Ablation and parameter sweeps built on [`run::execute`].

use crate::config::{dims_for_quads, RunConfig};
use crate::error::{CliError, Result};
use crate::export::{csv_string, write_file};
use crate::run::{self, Metrics, RunResult};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Iteration cap shared by both runs of an ablation.
pub const ABLATION_CAP: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drop {
    Length,
    Mu,
    Center,
}

impl Drop {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(Self::Length),
            "mu" => Ok(Self::Mu),
            "center" => Ok(Self::Center),
            _ => Err(CliError::Config(format!("unknown energy term {s:?}; use length, mu or center"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Length => "length",
            Self::Mu => "mu",
            Self::Center => "center",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSide {
    pub status: String,
    pub iterations: usize,
    pub mean_edge_ratio: f64,
    pub foldovers: usize,
    pub max_mu: f64,
    pub centroid_drift: f64,
}

impl From<&Metrics> for AblationSide {
    fn from(m: &Metrics) -> Self {
        Self {
            status: m.status.clone(),
            iterations: m.iterations,
            mean_edge_ratio: m.mean_edge_ratio,
            foldovers: m.foldovers,
            max_mu: m.max_mu,
            centroid_drift: m.centroid_drift,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub drop: Drop,
    pub cap: usize,
    pub full: AblationSide,
    pub dropped: AblationSide,
    /// The effect the dropped term is expected to show.
    pub expected: String,
    pub holds: bool,
}

/// Base config adjusted for an ablation: iteration cap (per solve call, so per
/// homotopy stage when continuation is on), and for `center` a domain twice as
/// large around an unchanged pattern footprint.
pub fn ablation_base(cfg: &RunConfig, drop: Drop, cap: usize) -> RunConfig {
    let mut base = cfg.clone();
    base.solver.max_iters = cap;
    if drop == Drop::Center {
        let fp = cfg.footprint();
        let d = cfg.domain();
        let c = d.center();
        let (hw, hh) = (d.width(), d.height());
        base.surface.domain = [[c[0] - hw, c[0] + hw], [c[1] - hh, c[1] + hh]];
        base.pattern.footprint = Some([fp.x, fp.y]);
    }
    base
}

pub fn ablate(cfg: &RunConfig, drop: Drop, cap: usize) -> Result<(AblationReport, RunResult, RunResult)> {
    let base = ablation_base(cfg, drop, cap);
    let root = cfg.output.dir.clone();
    let mut full_cfg = base.clone();
    full_cfg.output.dir = root.join("full");
    let mut drop_cfg = base;
    drop_cfg.output.dir = root.join(format!("drop-{}", drop.as_str()));
    match drop {
        Drop::Length => drop_cfg.weights.length = 0.0,
        Drop::Mu => drop_cfg.weights.mu = 0.0,
        Drop::Center => drop_cfg.weights.center = 0.0,
    }
    let full = run::execute(&full_cfg)?;
    let dropped = run::execute(&drop_cfg)?;
    let (f, d) = (&full.manifest.metrics, &dropped.manifest.metrics);
    let (expected, holds) = match drop {
        Drop::Length => ("dropped mean_edge_ratio < full mean_edge_ratio", d.mean_edge_ratio < f.mean_edge_ratio),
        Drop::Mu => ("dropped max_mu > full max_mu", d.max_mu > f.max_mu),
        Drop::Center => ("dropped centroid_drift > full centroid_drift", d.centroid_drift > f.centroid_drift),
    };
    let report = AblationReport {
        drop,
        cap,
        full: f.into(),
        dropped: d.into(),
        expected: expected.into(),
        holds,
    };
    write_file(&root.join("ablation.toml"), &toml::to_string(&report).expect("report serializes"))?;
    Ok((report, full, dropped))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    #[serde(rename = "E_l")]
    pub e_length: f64,
    pub mean_mu: f64,
    pub max_mu: f64,
    pub feas_planarity: f64,
    pub feas_develop: f64,
    pub iterations: usize,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionRow {
    pub quads: usize,
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "E_l")]
    pub e_length: f64,
    pub mean_mu: f64,
    pub max_mu: f64,
    pub feas_planarity: f64,
    pub feas_develop: f64,
    pub iterations: usize,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub parameter: String,
    pub values: Vec<f64>,
    pub mean_mu: Vec<f64>,
    pub converged: Vec<bool>,
    /// The compared pair, when both values were part of the sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compared: Option<[f64; 2]>,
    pub expected: String,
    /// `mean_mu` at `compared[0]` exceeds that at `compared[1]`, both runs converged.
    pub holds: bool,
}

/// Runs the configs on a pool of `jobs` workers; results keep the input order.
pub fn run_all(configs: Vec<RunConfig>, jobs: usize) -> Result<Vec<RunResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Solver(format!("worker pool: {e}")))?;
    use rayon::prelude::*;
    pool.install(|| configs.par_iter().map(run::execute).collect())
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn trend(parameter: &str, values: &[f64], results: &[RunResult], pair: [f64; 2], expected: &str) -> TrendSummary {
    let mean_mu: Vec<f64> = results.iter().map(|r| r.manifest.metrics.mean_mu).collect();
    let converged: Vec<bool> = results.iter().map(|r| r.status().is_success()).collect();
    let idx = |v: f64| values.iter().position(|&x| (x - v).abs() <= 1e-12 * v.abs().max(1.0));
    let (compared, holds) = match (idx(pair[0]), idx(pair[1])) {
        (Some(a), Some(b)) if a != b => (Some(pair), converged[a] && converged[b] && mean_mu[a] > mean_mu[b]),
        _ => (None, false),
    };
    TrendSummary {
        parameter: parameter.into(),
        values: values.to_vec(),
        mean_mu,
        converged,
        compared,
        expected: expected.into(),
        holds,
    }
}

fn write_summary(root: &Path, csv_name: &str, csv: String, summary: &TrendSummary) -> Result<()> {
    write_file(&root.join(csv_name), &csv)?;
    write_file(&root.join("trend.toml"), &toml::to_string(summary).expect("summary serializes"))
}

pub fn sweep_epsilon(cfg: &RunConfig, values: &[f64], jobs: Option<usize>) -> Result<(TrendSummary, Vec<RunResult>)> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one epsilon".into()));
    }
    let root = cfg.output.dir.clone();
    let configs = values
        .iter()
        .map(|&eps| {
            let mut c = cfg.clone();
            c.epsilon = eps;
            c.output.dir = root.join(format!("eps-{eps}"));
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;
    let results = run_all(configs, jobs.unwrap_or_else(default_jobs))?;
    let rows: Vec<EpsilonRow> = results
        .iter()
        .map(|r| {
            let m = &r.manifest.metrics;
            EpsilonRow {
                epsilon: r.manifest.config.epsilon,
                e_length: m.e_length,
                mean_mu: m.mean_mu,
                max_mu: m.max_mu,
                feas_planarity: m.max_planarity,
                feas_develop: m.max_develop,
                iterations: m.iterations,
                status: m.status.clone(),
            }
        })
        .collect();
    let summary = trend("epsilon", values, &results, [0.01, 0.05], "mean_mu(epsilon=0.01) > mean_mu(epsilon=0.05)");
    write_summary(&root, "sweep_epsilon.csv", csv_string(&rows)?, &summary)?;
    Ok((summary, results))
}

pub fn sweep_resolution(cfg: &RunConfig, quads: &[usize], jobs: Option<usize>) -> Result<(TrendSummary, Vec<RunResult>)> {
    if quads.is_empty() {
        return Err(CliError::Config("sweep needs at least one quad count".into()));
    }
    let root = cfg.output.dir.clone();
    let configs = quads
        .iter()
        .map(|&q| {
            dims_for_quads(q)?;
            let mut c = cfg.clone();
            c.pattern.dims = None;
            c.pattern.quads = Some(q);
            c.output.dir = root.join(format!("quads-{q}"));
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;
    let results = run_all(configs, jobs.unwrap_or_else(default_jobs))?;
    let rows: Vec<ResolutionRow> = results
        .iter()
        .map(|r| {
            let m = &r.manifest.metrics;
            let p = &r.problem.pattern;
            ResolutionRow {
                quads: p.quads.len(),
                rows: p.rows,
                cols: p.cols,
                e_length: m.e_length,
                mean_mu: m.mean_mu,
                max_mu: m.max_mu,
                feas_planarity: m.max_planarity,
                feas_develop: m.max_develop,
                iterations: m.iterations,
                status: m.status.clone(),
            }
        })
        .collect();
    let values: Vec<f64> = quads.iter().map(|&q| q as f64).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = trend("quads", &values, &results, [lo, hi], "mean_mu at the smallest |Q| > mean_mu at the largest |Q|");
    write_summary(&root, "sweep_resolution.csv", csv_string(&rows)?, &summary)?;
    Ok((summary, results))
}
