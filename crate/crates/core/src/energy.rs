//! Objective `rho1 E_l + rho2 E_mu + rho3 E_c` and its derivatives in `y`.

use crate::assembly::{EnergyTerm, LocalTerm};
use crate::error::{Error, Result};
use crate::jet::{norm3, sub3, Jet};
use crate::par::ExecMode;
use crate::pattern::{fold, FoldedState, QuadPattern};
use crate::qc;
use crate::surface::OffsetPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub length: f64,
    pub mu: f64,
    pub center: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            length: 1.0,
            mu: 0.1,
            center: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyModel {
    pub weights: Weights,
    /// 3D edge lengths of the initial folded pattern, indexed like `pattern.edges`.
    pub ref_lengths: Vec<f64>,
    pub center: [f64; 2],
    /// Domain extents `(R_x, R_y)`.
    pub ranges: [f64; 2],
}

impl EnergyModel {
    /// Reference lengths from the fold of the rest pattern; centered on its bounding box.
    pub fn new(pattern: &QuadPattern, pair: &OffsetPair, weights: Weights) -> Result<Self> {
        let p0 = fold(pattern, pair, &pattern.vertices0, ExecMode::Sequential)?;
        let ref_lengths = edge_lengths(pattern, &p0.positions);
        if let Some(k) = ref_lengths.iter().position(|&l| !(l > 0.0)) {
            return Err(Error::DegenerateEdge(k));
        }
        let d = pair.domain();
        Ok(Self {
            weights,
            ref_lengths,
            center: pattern.rest_center(),
            ranges: [d.width(), d.height()],
        })
    }
}

pub fn edge_lengths(pattern: &QuadPattern, positions: &[[f64; 3]]) -> Vec<f64> {
    pattern
        .edges
        .iter()
        .map(|&[i, j]| norm3(&sub3(&positions[i], &positions[j])))
        .collect()
}

pub fn length_terms(
    pattern: &QuadPattern,
    folded: &FoldedState,
    model: &EnergyModel,
    mode: ExecMode,
) -> Result<Vec<LocalTerm>> {
    mode.map(&pattern.edges, |k, &[i, j]| {
        let pi = folded.jets[i].map(|c| Jet::<4>::lift(&c, 0));
        let pj = folded.jets[j].map(|c| Jet::<4>::lift(&c, 1));
        let len = norm3(&sub3(&pi, &pj));
        if !(len.v > 0.0) {
            return Err(Error::DegenerateEdge(k));
        }
        let l0 = model.ref_lengths[k];
        let d = len - l0;
        let term = d * d * (0.5 / l0);
        Ok(LocalTerm::from_jet(LocalTerm::vertex_vars(&[i, j]), &term))
    })
    .into_iter()
    .collect()
}

/// `E_l = (1/|L|) sum (L_f - L_0)^2 / (2 L_0)` over 3D folded edge lengths.
pub fn energy_length(
    pattern: &QuadPattern,
    folded: &FoldedState,
    model: &EnergyModel,
    mode: ExecMode,
) -> Result<EnergyTerm> {
    let mut e = EnergyTerm::zero(2 * pattern.num_vertices());
    e.accumulate(&length_terms(pattern, folded, model, mode)?, 1.0 / pattern.edges.len() as f64);
    Ok(e)
}

/// `E_c = (1/|V|) sum ((v_x - c_x)/R_x)^2 + ((v_y - c_y)/R_y)^2` over the deformed vertices.
pub fn energy_center(y: &[[f64; 2]], model: &EnergyModel) -> EnergyTerm {
    let nv = y.len() as f64;
    let mut e = EnergyTerm::zero(2 * y.len());
    for (i, p) in y.iter().enumerate() {
        for k in 0..2 {
            let r2 = model.ranges[k] * model.ranges[k];
            let d = p[k] - model.center[k];
            e.value += d * d / r2 / nv;
            e.grad[2 * i + k] = 2.0 * d / r2 / nv;
            e.hess.push(2 * i + k, 2 * i + k, 2.0 / r2 / nv);
        }
    }
    e
}

/// Unweighted values of the three energy terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyValues {
    pub length: f64,
    pub mu: f64,
    pub center: f64,
}

/// Weighted objective on an existing fold of `y`. Terms with zero weight are skipped.
pub fn total_energy_folded(
    pattern: &QuadPattern,
    folded: &FoldedState,
    model: &EnergyModel,
    mode: ExecMode,
) -> Result<(EnergyTerm, EnergyValues)> {
    let y = &folded.source_y;
    let w = model.weights;
    let mut total = EnergyTerm::zero(2 * y.len());
    let mut values = EnergyValues::default();
    if w.length != 0.0 {
        let e = energy_length(pattern, folded, model, mode)?;
        values.length = e.value;
        total.add_scaled(&e, w.length);
    }
    if w.mu != 0.0 {
        let e = qc::energy_mu(pattern, y, mode)?;
        values.mu = e.value;
        total.add_scaled(&e, w.mu);
    }
    if w.center != 0.0 {
        let e = energy_center(y, model);
        values.center = e.value;
        total.add_scaled(&e, w.center);
    }
    Ok((total, values))
}

pub fn total_energy(
    pattern: &QuadPattern,
    pair: &OffsetPair,
    y: &[[f64; 2]],
    model: &EnergyModel,
    mode: ExecMode,
) -> Result<(EnergyTerm, EnergyValues)> {
    let folded = fold(pattern, pair, y, mode)?;
    total_energy_folded(pattern, &folded, model, mode)
}

/// Unweighted term values regardless of the weights, for reporting.
pub fn energy_values(
    pattern: &QuadPattern,
    folded: &FoldedState,
    model: &EnergyModel,
) -> Result<EnergyValues> {
    let lengths = edge_lengths(pattern, &folded.positions);
    let length = lengths
        .iter()
        .zip(&model.ref_lengths)
        .map(|(l, l0)| (l - l0).powi(2) / (2.0 * l0))
        .sum::<f64>()
        / lengths.len() as f64;
    let field = qc::beltrami(pattern, &folded.source_y)?;
    let mu = field
        .grad_coeffs
        .iter()
        .map(|&c| qc::mu_sq_guarded(c))
        .sum::<f64>()
        / pattern.tris.len() as f64;
    Ok(EnergyValues {
        length,
        mu,
        center: energy_center(&folded.source_y, model).value,
    })
}
