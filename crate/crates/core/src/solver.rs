//! Newton's method on the KKT conditions of the equality-constrained design problem.
//!
//! Each iteration solves
//!
//! ```text
//! [ H + tau I   J^T     ] [dy]      [ grad E + J^T lambda ]
//! [ J           -tau I  ] [dl] = -  [ g                   ]
//! ```
//!
//! with `H` the exact Hessian of the Lagrangian, then takes a (possibly damped) step
//! `y += alpha dy`, `lambda += alpha dl`.

use crate::assembly::{flatten, inf_norm, unflatten, CsrMatrix, EnergyTerm, Triplets};
use crate::constraint::{self, ConstraintSet};
use crate::energy::{self, EnergyModel, EnergyValues};
use crate::error::{Error, Result};
use crate::par::ExecMode;
use crate::pattern::{fold, FoldedState, QuadPattern};
use crate::surface::OffsetPair;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `max |g| < tol_feas` ...
    pub tol_feas: f64,
    /// ... and `|grad L|_inf < tol_stat`.
    pub tol_stat: f64,
    /// Initial primal shift.
    pub tau0: f64,
    pub tau_growth: f64,
    /// Number of shift increases tried after a failed factorization or line search.
    pub max_shifts: usize,
    /// Backtracking on the merit `|grad L|^2 + |g|^2`. Off reproduces plain Newton.
    pub damping: bool,
    /// Sufficient decrease factor for damped steps.
    pub merit_decrease: f64,
    pub max_backtracks: usize,
    /// Try a Levenberg-Marquardt step on the KKT residual when the damped Newton
    /// step is shorter than this fraction (or fails); 0 disables the fallback.
    pub lm_trigger: f64,
    pub max_lm_tries: usize,
    /// Fall back to a homotopy from the flat chart when the direct solve fails.
    pub continuation: bool,
    /// First homotopy step in the blend parameter.
    pub blend_step: f64,
    /// The homotopy gives up once halving would take the step below this.
    pub min_blend_step: f64,
    pub mode: ExecMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol_feas: 1e-12,
            tol_stat: 1e-8,
            tau0: 0.0,
            tau_growth: 10.0,
            max_shifts: 8,
            damping: true,
            merit_decrease: 1e-4,
            max_backtracks: 30,
            lm_trigger: 0.0,
            max_lm_tries: 12,
            continuation: true,
            blend_step: 0.1,
            min_blend_step: 1.0 / 256.0,
            mode: ExecMode::Parallel,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters >= 1
            && self.tol_feas > 0.0
            && self.tol_stat > 0.0
            && self.tau0 >= 0.0
            && self.tau_growth > 1.0
            && (0.0..0.5).contains(&self.merit_decrease)
            && (0.0..=1.0).contains(&self.lm_trigger)
            && self.min_blend_step > 0.0
            && (self.min_blend_step..=1.0).contains(&self.blend_step);
        if ok {
            Ok(())
        } else {
            Err(Error::Internal("invalid solver configuration".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    LinearSolveFailure,
    DomainExit,
    /// No step along the Newton direction reduced the merit, even after shifting.
    Stalled,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIters => "max-iters",
            Self::LinearSolveFailure => "linear-solve-failure",
            Self::DomainExit => "domain-exit",
            Self::Stalled => "stalled",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Self::Converged)
    }
}

/// State after one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: EnergyValues,
    pub objective: f64,
    pub max_planarity: f64,
    pub max_develop: f64,
    pub stationarity: f64,
    pub step: f64,
    pub shift: f64,
    /// Levenberg-Marquardt damping if this was a fallback step, else 0.
    pub lm_damping: f64,
    /// Homotopy parameter of the chart this step was taken on; 1 is the target.
    pub blend: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_feas: f64,
    pub final_stat: f64,
    pub trace: Vec<TraceRecord>,
    pub status: SolveStatus,
    /// Largest scaled KKT solve residual seen.
    pub max_kkt_residual: f64,
    /// Homotopy stages solved on the way to the target; 0 for a direct solve.
    pub stages: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub y: Vec<[f64; 2]>,
    pub lambda: Vec<f64>,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct KktSolution {
    pub dy: Vec<f64>,
    pub dl: Vec<f64>,
    /// `|K d + rhs|_inf / (1 + |rhs|_inf)`.
    pub residual: f64,
}

/// Accepted bound on the scaled KKT residual.
pub const KKT_RESIDUAL_TOL: f64 = 1e-10;

/// Solves the shifted saddle-point system for the Newton step by sparse LU.
///
/// A positive `tau` shifts the primal block by `+tau I` and the dual block by
/// `-tau I`, which keeps the system solvable when the constraint Jacobian is
/// rank deficient.
pub fn kkt_step(h: &CsrMatrix, j: &CsrMatrix, grad_l: &[f64], g: &[f64], tau: f64) -> Result<KktSolution> {
    let n = h.n_rows;
    let m = j.n_rows;
    if h.n_cols != n || j.n_cols != n || grad_l.len() != n || g.len() != m || tau < 0.0 {
        return Err(Error::LinearSolve("inconsistent KKT dimensions".into()));
    }
    let dim = n + m;
    let mut trip = Vec::with_capacity(h.nnz() + 2 * j.nnz() + n);
    for (r, c, v) in h.iter() {
        trip.push(Triplet::new(r, c, v));
    }
    if tau > 0.0 {
        for i in 0..n {
            trip.push(Triplet::new(i, i, tau));
        }
        for i in 0..m {
            trip.push(Triplet::new(n + i, n + i, -tau));
        }
    }
    for (r, c, v) in j.iter() {
        trip.push(Triplet::new(n + r, c, v));
        trip.push(Triplet::new(c, n + r, v));
    }
    let kkt = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &trip)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let lu = kkt.sp_lu().map_err(|e| Error::LinearSolve(format!("{e:?}")))?;

    let rhs: Vec<f64> = grad_l.iter().chain(g).map(|v| -v).collect();
    let rhs_norm = inf_norm(&rhs);
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut out = h.matvec(&x[..n]);
        let jt = j.tmatvec(&x[n..]);
        for i in 0..n {
            out[i] += jt[i] + tau * x[i];
        }
        let jx = j.matvec(&x[..n]);
        out.extend(jx.iter().zip(&x[n..]).map(|(a, l)| a - tau * l));
        out
    };
    let solve = |b: &[f64]| -> Vec<f64> {
        let bm = Mat::<f64>::from_fn(dim, 1, |i, _| b[i]);
        let x = lu.solve(&bm);
        (0..dim).map(|i| x[(i, 0)]).collect()
    };

    let mut x = solve(&rhs);
    let mut res = 0.0;
    // one refinement pass if the first solve is not accurate enough
    for pass in 0..2 {
        let kx = apply(&x);
        let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
        res = inf_norm(&r) / (1.0 + rhs_norm);
        if !res.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("non-finite solution".into()));
        }
        if res < KKT_RESIDUAL_TOL || pass == 1 {
            break;
        }
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    if !(res < KKT_RESIDUAL_TOL) {
        return Err(Error::LinearSolve(format!("KKT residual {res:e} above tolerance")));
    }
    let dl = x.split_off(n);
    Ok(KktSolution { dy: x, dl, residual: res })
}

/// Levenberg-Marquardt step for the KKT residual `F = [grad L; g]` with the unshifted
/// KKT matrix `K`: minimizes `|K d + F|^2 + nu |d|^2` via the augmented system
/// `[I K; K -nu I] [r; d] = [-F; 0]`, which keeps `K` sparse.
pub fn lm_step(h: &CsrMatrix, j: &CsrMatrix, grad_l: &[f64], g: &[f64], nu: f64) -> Result<KktSolution> {
    let (n, m) = (h.n_rows, j.n_rows);
    if h.n_cols != n || j.n_cols != n || grad_l.len() != n || g.len() != m || !(nu > 0.0) {
        return Err(Error::LinearSolve("inconsistent least-squares system".into()));
    }
    let dim = n + m;
    let mut trip = Vec::with_capacity(2 * (h.nnz() + 2 * j.nnz() + dim));
    for i in 0..dim {
        trip.push(Triplet::new(i, i, 1.0));
        trip.push(Triplet::new(dim + i, dim + i, -nu));
    }
    let mut put = |a: usize, b: usize, v: f64| {
        trip.push(Triplet::new(a, dim + b, v));
        trip.push(Triplet::new(dim + b, a, v));
    };
    for (r, c, v) in h.iter() {
        put(r, c, v);
    }
    for (r, c, v) in j.iter() {
        put(n + r, c, v);
        put(c, n + r, v);
    }
    let aug = SparseColMat::<usize, f64>::try_new_from_triplets(2 * dim, 2 * dim, &trip)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let lu = aug.sp_lu().map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let rhs = Mat::<f64>::from_fn(2 * dim, 1, |i, _| match i {
        i if i < n => -grad_l[i],
        i if i < dim => -g[i - n],
        _ => 0.0,
    });
    let x = lu.solve(&rhs);
    let mut dy: Vec<f64> = (dim..2 * dim).map(|i| x[(i, 0)]).collect();
    if dy.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolve("non-finite least-squares step".into()));
    }
    let dl = dy.split_off(n);
    Ok(KktSolution { dy, dl, residual: 0.0 })
}

/// Everything evaluated at one `(y, lambda)`.
pub struct Evaluation {
    pub folded: FoldedState,
    pub energy: EnergyTerm,
    pub values: EnergyValues,
    pub constraints: ConstraintSet,
    pub grad_l: Vec<f64>,
    pub g: Vec<f64>,
}

impl Evaluation {
    pub fn merit(&self) -> f64 {
        self.grad_l.iter().map(|v| v * v).sum::<f64>() + self.g.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn feasibility(&self) -> f64 {
        inf_norm(&self.g)
    }

    pub fn stationarity(&self) -> f64 {
        inf_norm(&self.grad_l)
    }

    /// Exact Hessian of the Lagrangian.
    pub fn lagrangian_hessian(&self, lambda: &[f64]) -> CsrMatrix {
        let mut t: Triplets = self.energy.hess.clone();
        t.entries.extend(self.constraints.weighted_hessian(lambda).entries);
        t.to_csr()
    }
}

pub fn evaluate(
    pattern: &QuadPattern,
    pair: &OffsetPair,
    model: &EnergyModel,
    y: &[[f64; 2]],
    lambda: &[f64],
    mode: ExecMode,
) -> Result<Evaluation> {
    let folded = fold(pattern, pair, y, mode)?;
    let (energy, values) = energy::total_energy_folded(pattern, &folded, model, mode)?;
    let constraints = constraint::assemble(pattern, &folded, mode)?;
    let mut grad_l = constraints.jacobian_transpose_times(lambda);
    for (gl, ge) in grad_l.iter_mut().zip(&energy.grad) {
        *gl += ge;
    }
    let g = constraints.residual();
    Ok(Evaluation {
        folded,
        energy,
        values,
        constraints,
        grad_l,
        g,
    })
}

fn record(iteration: usize, ev: &Evaluation, step: f64, shift: f64, lm_damping: f64, blend: f64) -> TraceRecord {
    TraceRecord {
        iteration,
        energy: ev.values,
        objective: ev.energy.value,
        max_planarity: ev.constraints.max_planarity(),
        max_develop: ev.constraints.max_develop(),
        stationarity: ev.stationarity(),
        step,
        shift,
        lm_damping,
        blend,
    }
}

/// Runs the Newton-KKT iteration from `y0` with `lambda = 0`.
///
/// Fails only on invalid input; solver breakdowns are reported through
/// [`SolveReport::status`] together with the last accepted iterate.
pub fn optimize(
    pattern: &QuadPattern,
    pair: &OffsetPair,
    model: &EnergyModel,
    cfg: &SolverConfig,
    y0: &[[f64; 2]],
) -> Result<SolveOutcome> {
    let lambda0 = vec![0.0; pattern.quads.len() + pattern.interior.len()];
    optimize_from(pattern, pair, model, cfg, y0, &lambda0)
}

/// [`optimize`] with explicit starting multipliers.
pub fn optimize_from(
    pattern: &QuadPattern,
    pair: &OffsetPair,
    model: &EnergyModel,
    cfg: &SolverConfig,
    y0: &[[f64; 2]],
    lambda0: &[f64],
) -> Result<SolveOutcome> {
    cfg.validate()?;
    if lambda0.len() != pattern.quads.len() + pattern.interior.len() {
        return Err(Error::Internal("multiplier count does not match constraints".into()));
    }
    let mut it = Iteration {
        pattern,
        pair,
        model,
        cfg,
        max_kkt_residual: 0.0,
        nu: 0.0,
    };
    let mut y = y0.to_vec();
    let mut lambda = lambda0.to_vec();
    let mut ev = evaluate(pattern, pair, model, &y, &lambda, cfg.mode)?;
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIters;

    for k in 0..=cfg.max_iters {
        if ev.feasibility() < cfg.tol_feas && ev.stationarity() < cfg.tol_stat {
            status = SolveStatus::Converged;
            break;
        }
        if k == cfg.max_iters {
            break;
        }
        match it.step(&y, &lambda, &ev) {
            Ok(c) => {
                trace.push(record(k + 1, &c.ev, c.alpha, c.tau, c.lm_damping, pair.chart.blend));
                (y, lambda, ev) = (c.y, c.lambda, c.ev);
            }
            Err(failure) => {
                status = failure;
                break;
            }
        }
    }

    let report = SolveReport {
        iterations: trace.len(),
        final_feas: ev.feasibility(),
        final_stat: ev.stationarity(),
        trace,
        status,
        max_kkt_residual: it.max_kkt_residual,
        stages: 0,
    };
    Ok(SolveOutcome { y, lambda, report })
}

struct Candidate {
    y: Vec<[f64; 2]>,
    lambda: Vec<f64>,
    ev: Evaluation,
    alpha: f64,
    tau: f64,
    lm_damping: f64,
}

struct Iteration<'a> {
    pattern: &'a QuadPattern,
    pair: &'a OffsetPair,
    model: &'a EnergyModel,
    cfg: &'a SolverConfig,
    max_kkt_residual: f64,
    /// Current Levenberg-Marquardt damping; 0 until first needed.
    nu: f64,
}

impl Iteration<'_> {
    fn trial(&self, x0: &[f64], l0: &[f64], dy: &[f64], dl: &[f64], alpha: f64) -> std::result::Result<Candidate, SolveStatus> {
        let x: Vec<f64> = x0.iter().zip(dy).map(|(a, d)| a + alpha * d).collect();
        let y = unflatten(&x);
        if !y.iter().all(|p| self.pair.domain().contains(*p)) {
            return Err(SolveStatus::DomainExit);
        }
        let lambda: Vec<f64> = l0.iter().zip(dl).map(|(a, d)| a + alpha * d).collect();
        // a degenerate fold (collapsed edge or fan) is rejected like a bad merit
        let ev = evaluate(self.pattern, self.pair, self.model, &y, &lambda, self.cfg.mode).map_err(|_| SolveStatus::Stalled)?;
        Ok(Candidate {
            y,
            lambda,
            ev,
            alpha,
            tau: 0.0,
            lm_damping: 0.0,
        })
    }

    /// Shifted Newton step with backtracking; the first acceptable step wins.
    fn newton(&mut self, y: &[[f64; 2]], lambda: &[f64], ev: &Evaluation) -> std::result::Result<Candidate, SolveStatus> {
        let cfg = self.cfg;
        let h = ev.lagrangian_hessian(lambda);
        let jac = ev.constraints.jacobian();
        let base_shift = if cfg.tau0 > 0.0 {
            cfg.tau0
        } else {
            1e-8 * (0..h.n_rows).map(|i| h.get(i, i).abs()).fold(1e-12, f64::max)
        };
        let merit0 = ev.merit();
        let x0 = flatten(y);
        let mut failure = SolveStatus::LinearSolveFailure;
        let mut tau = cfg.tau0;
        for attempt in 0..=cfg.max_shifts {
            if attempt > 0 {
                tau = if tau > 0.0 { tau * cfg.tau_growth } else { base_shift };
            }
            let step = match kkt_step(&h, &jac, &ev.grad_l, &ev.g, tau) {
                Ok(s) => s,
                Err(_) => {
                    failure = SolveStatus::LinearSolveFailure;
                    continue;
                }
            };
            self.max_kkt_residual = self.max_kkt_residual.max(step.residual);
            debug_assert!(step.residual < KKT_RESIDUAL_TOL);

            let mut alpha = 1.0;
            for _ in 0..=cfg.max_backtracks {
                match self.trial(&x0, lambda, &step.dy, &step.dl, alpha) {
                    Ok(c) if !cfg.damping => return Ok(Candidate { tau, ..c }),
                    Ok(c) => {
                        let m = c.ev.merit();
                        let ok = if alpha == 1.0 {
                            m < merit0
                        } else {
                            m <= (1.0 - cfg.merit_decrease * alpha) * merit0
                        };
                        if ok && m.is_finite() {
                            return Ok(Candidate { tau, ..c });
                        }
                        failure = SolveStatus::Stalled;
                    }
                    Err(s) => failure = s,
                }
                alpha *= 0.5;
            }
            if !cfg.damping {
                break;
            }
        }
        Err(failure)
    }

    /// Least-squares multipliers `argmin |grad E + J^T lambda|` at fixed `y`.
    fn reset_multipliers(&self, y: &[[f64; 2]], ev: &Evaluation) -> Option<Candidate> {
        let jac = ev.constraints.jacobian();
        let mut eye = Triplets::new(jac.n_cols, jac.n_cols);
        for i in 0..jac.n_cols {
            eye.push(i, i, 1.0);
        }
        let zero = vec![0.0; jac.n_rows];
        let s = kkt_step(&eye.to_csr(), &jac, &ev.energy.grad, &zero, 1e-12).ok()?;
        let ev = evaluate(self.pattern, self.pair, self.model, y, &s.dl, self.cfg.mode).ok()?;
        Some(Candidate {
            y: y.to_vec(),
            lambda: s.dl,
            ev,
            alpha: 0.0,
            tau: 0.0,
            lm_damping: 0.0,
        })
    }

    /// Levenberg-Marquardt step on the KKT residual; `nu` adapts across iterations.
    fn levenberg_marquardt(&mut self, y: &[[f64; 2]], lambda: &[f64], ev: &Evaluation, bound: f64) -> Option<Candidate> {
        let h = ev.lagrangian_hessian(lambda);
        let jac = ev.constraints.jacobian();
        if self.nu == 0.0 {
            let kmax = h.iter().chain(jac.iter()).fold(0.0f64, |m, (_, _, v)| m.max(v.abs()));
            self.nu = 1e-6 * kmax * kmax;
        }
        let x0 = flatten(y);
        let start = self.nu;
        let mut nu = start;
        for _ in 0..self.cfg.max_lm_tries {
            if let Ok(step) = lm_step(&h, &jac, &ev.grad_l, &ev.g, nu) {
                if let Ok(c) = self.trial(&x0, lambda, &step.dy, &step.dl, 1.0) {
                    if c.ev.merit() < bound {
                        self.nu = (nu / 3.0).max(1e-300);
                        return Some(Candidate { lm_damping: nu, ..c });
                    }
                }
            }
            nu *= 4.0;
        }
        self.nu = start;
        None
    }

    /// One accepted iteration, or the reason none could be taken.
    fn step(&mut self, y: &[[f64; 2]], lambda: &[f64], ev: &Evaluation) -> std::result::Result<Candidate, SolveStatus> {
        let cfg = self.cfg;
        let newton = self.newton(y, lambda, ev);
        let fallback = cfg.damping && cfg.lm_trigger > 0.0;
        let short = |r: &std::result::Result<Candidate, SolveStatus>| r.as_ref().map_or(true, |c| c.alpha < cfg.lm_trigger);
        if !fallback || !short(&newton) {
            return newton;
        }
        let mut best = newton;
        let merit = |r: &std::result::Result<Candidate, SolveStatus>| r.as_ref().map_or(ev.merit(), |c| c.ev.merit());
        // stale multipliers are a common cause of short steps
        if let Some(reset) = self.reset_multipliers(y, ev) {
            if reset.ev.merit() < merit(&best) {
                let again = self.newton(y, &reset.lambda, &reset.ev);
                best = match again {
                    Ok(c) if c.ev.merit() < reset.ev.merit() => Ok(c),
                    _ => Ok(reset),
                };
            }
        }
        if short(&best) {
            let bound = merit(&best);
            // start from the reset multipliers if they were kept without a Newton step
            let lm = match &best {
                Ok(c) if c.alpha == 0.0 => self.levenberg_marquardt(&c.y, &c.lambda, &c.ev, bound),
                _ => self.levenberg_marquardt(y, lambda, ev, bound),
            };
            if let Some(c) = lm {
                best = Ok(c);
            }
        }
        best
    }
}

/// Solves from the rest pattern; if that fails, follows the chart homotopy from
/// the plane (where the rest pattern is feasible) to the target, warm-starting
/// each stage and halving the blend step whenever a stage does not converge.
///
/// The trace holds every iteration taken, including the failed direct attempt.
pub fn solve(pattern: &QuadPattern, pair: &OffsetPair, model: &EnergyModel, cfg: &SolverConfig) -> Result<SolveOutcome> {
    let direct = optimize(pattern, pair, model, cfg, &pattern.vertices0)?;
    if direct.report.status.is_success() || !cfg.continuation || pair.chart.blend != 1.0 {
        return Ok(direct);
    }
    let mut trace = direct.report.trace.clone();
    let mut max_kkt = direct.report.max_kkt_residual;
    let mut append = |trace: &mut Vec<TraceRecord>, report: &SolveReport| {
        let base = trace.len();
        trace.extend(report.trace.iter().enumerate().map(|(k, r)| TraceRecord { iteration: base + k + 1, ..*r }));
        max_kkt = max_kkt.max(report.max_kkt_residual);
    };

    let mode = cfg.mode;
    let mut y = pattern.vertices0.clone();
    let mut lambda = vec![0.0; pattern.quads.len() + pattern.interior.len()];
    let (mut t, mut dt, mut stages) = (0.0f64, cfg.blend_step, 0);
    while t < 1.0 {
        let next = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        let stage = OffsetPair::new(pair.chart.with_blend(next), pair.epsilon).and_then(|p| {
            // each stage measures length changes against the rest pattern folded onto its own chart
            let rest = fold(pattern, &p, &pattern.vertices0, mode)?;
            let stage_model = EnergyModel {
                ref_lengths: energy::edge_lengths(pattern, &rest.positions),
                ..model.clone()
            };
            optimize_from(pattern, &p, &stage_model, cfg, &y, &lambda)
        });
        match stage {
            Ok(out) if out.report.status.is_success() => {
                append(&mut trace, &out.report);
                stages += 1;
                t = next;
                y = out.y;
                lambda = out.lambda;
                dt = (dt * 1.5).min(1.0);
                if t == 1.0 {
                    let report = SolveReport {
                        iterations: trace.len(),
                        final_feas: out.report.final_feas,
                        final_stat: out.report.final_stat,
                        trace,
                        status: SolveStatus::Converged,
                        max_kkt_residual: max_kkt,
                        stages,
                    };
                    return Ok(SolveOutcome { y, lambda, report });
                }
            }
            other => {
                if let Ok(out) = &other {
                    append(&mut trace, &out.report);
                }
                dt *= 0.5;
                if dt < cfg.min_blend_step {
                    break;
                }
            }
        }
    }
    let report = SolveReport {
        iterations: trace.len(),
        trace,
        max_kkt_residual: max_kkt,
        stages,
        ..direct.report
    };
    Ok(SolveOutcome { report, ..direct })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> CsrMatrix {
        let mut t = Triplets::new(rows.len(), rows.first().map_or(0, |r| r.len()));
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.to_csr()
    }

    #[test]
    fn unconstrained_newton_step() {
        let h = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let j = Triplets::new(0, 2).to_csr();
        let s = kkt_step(&h, &j, &[1.0, 0.0], &[], 0.0).unwrap();
        assert_eq!(s.dy, vec![-1.0, 0.0]);
        assert!(s.dl.is_empty());
    }

    #[test]
    fn one_constraint_step() {
        let h = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let j = dense(&[&[1.0, 1.0]]);
        let s = kkt_step(&h, &j, &[0.0, 0.0], &[1.0], 0.0).unwrap();
        for (a, b) in s.dy.iter().zip([-0.5, -0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((s.dl[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_constraints_fail() {
        let h = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let j = dense(&[&[1.0, 1.0], &[2.0, 2.0]]);
        assert!(kkt_step(&h, &j, &[0.0, 0.0], &[1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch_fails() {
        let h = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let j = dense(&[&[1.0, 1.0]]);
        assert!(kkt_step(&h, &j, &[0.0], &[1.0], 0.0).is_err());
    }
}
