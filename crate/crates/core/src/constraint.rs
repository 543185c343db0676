//! Planarity and developability residuals on the folded pattern.
//!
//! Row order is fixed: one planarity row per quad in index order, then one
//! developability row per interior vertex in index order.

use crate::assembly::{CsrMatrix, LocalTerm, Triplets};
use crate::error::{Error, Result};
use crate::jet::{cross3, dot3, norm3, sub3, Jet, Real, V3};
use crate::par::ExecMode;
use crate::pattern::{FoldedState, InteriorVertex, QuadPattern};
use std::f64::consts::TAU;

/// Signed volume `[(b - a) x (c - a)] . (d - a)`.
pub fn planarity<T: Real>(a: &V3<T>, b: &V3<T>, c: &V3<T>, d: &V3<T>) -> T {
    dot3(&cross3(&sub3(b, a), &sub3(c, a)), &sub3(d, a))
}

/// Angle between `p - v` and `q - v` via `atan2(|e1 x e2|, e1 . e2)`.
pub fn corner_angle<T: Real>(v: &V3<T>, p: &V3<T>, q: &V3<T>) -> Option<T> {
    let e1 = sub3(p, v);
    let e2 = sub3(q, v);
    if dot3(&e1, &e1).value() == 0.0 || dot3(&e2, &e2).value() == 0.0 {
        return None;
    }
    Some(norm3(&cross3(&e1, &e2)).atan2(dot3(&e1, &e2)))
}

/// Angle defect `2 pi - sum of corner angles` for a fan of `(prev, next)` corner pairs.
pub fn developability<T: Real>(center: &V3<T>, fan: &[(V3<T>, V3<T>)]) -> Option<T> {
    let mut sum = T::cst(0.0);
    for (p, q) in fan {
        sum = sum + corner_angle(center, p, q)?;
    }
    Some(-sum + TAU)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub n_vars: usize,
    pub n_planarity: usize,
    /// Residual `g` with exact local gradient (Jacobian row) and Hessian per row.
    pub rows: Vec<LocalTerm>,
    /// Planarity residual divided by the cube of the quad's mean edge length.
    pub planarity_normalized: Vec<f64>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn residual(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn max_planarity(&self) -> f64 {
        self.rows[..self.n_planarity].iter().fold(0.0, |m, r| m.max(r.value.abs()))
    }

    pub fn max_develop(&self) -> f64 {
        self.rows[self.n_planarity..].iter().fold(0.0, |m, r| m.max(r.value.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_planarity().max(self.max_develop())
    }

    pub fn jacobian(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.rows.len(), self.n_vars);
        for (i, r) in self.rows.iter().enumerate() {
            for (&v, &g) in r.vars.iter().zip(&r.grad) {
                if g != 0.0 {
                    t.push(i, v, g);
                }
            }
        }
        t.to_csr()
    }

    /// `J^T lambda`.
    pub fn jacobian_transpose_times(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vars];
        for (r, &l) in self.rows.iter().zip(lambda) {
            for (&v, &g) in r.vars.iter().zip(&r.grad) {
                out[v] += l * g;
            }
        }
        out
    }

    /// `sum_i lambda_i hess(g_i)` as triplets.
    pub fn weighted_hessian(&self, lambda: &[f64]) -> Triplets {
        let mut t = Triplets::new(self.n_vars, self.n_vars);
        for (r, &l) in self.rows.iter().zip(lambda) {
            if l == 0.0 {
                continue;
            }
            let k = r.vars.len();
            for (a, &va) in r.vars.iter().enumerate() {
                for (b, &vb) in r.vars.iter().enumerate() {
                    let h = r.hess[a * k + b];
                    if h != 0.0 {
                        t.push(va, vb, l * h);
                    }
                }
            }
        }
        t
    }
}

fn planarity_row(folded: &FoldedState, quad: &[usize; 4]) -> (LocalTerm, f64) {
    let p: [V3<Jet<8>>; 4] = std::array::from_fn(|s| folded.jets[quad[s]].map(|c| Jet::lift(&c, s)));
    let g = planarity(&p[0], &p[1], &p[2], &p[3]);
    let x = &folded.positions;
    let mean_len = (0..4)
        .map(|k| norm3(&sub3(&x[quad[k]], &x[quad[(k + 1) % 4]])))
        .sum::<f64>()
        / 4.0;
    (
        LocalTerm::from_jet(LocalTerm::vertex_vars(quad), &g),
        g.v / mean_len.powi(3),
    )
}

/// Largest number of distinct vertices a developability row may touch.
pub const MAX_FAN_VERTICES: usize = 5;

fn develop_row(pattern: &QuadPattern, folded: &FoldedState, iv: &InteriorVertex) -> Result<LocalTerm> {
    let mut slots = vec![iv.vertex];
    let mut pairs = Vec::with_capacity(iv.fan.len());
    for &(q, corner) in &iv.fan {
        let quad = pattern.quads[q];
        let mut slot_of = |v: usize| match slots.iter().position(|&s| s == v) {
            Some(s) => s,
            None => {
                slots.push(v);
                slots.len() - 1
            }
        };
        let prev = slot_of(quad[(corner + 3) % 4]);
        let next = slot_of(quad[(corner + 1) % 4]);
        pairs.push((next, prev));
    }
    if slots.len() > MAX_FAN_VERTICES {
        return Err(Error::Internal(format!(
            "fan at vertex {} touches {} vertices",
            iv.vertex,
            slots.len()
        )));
    }
    let p: Vec<V3<Jet<10>>> = slots
        .iter()
        .enumerate()
        .map(|(s, &v)| folded.jets[v].map(|c| Jet::lift(&c, s)))
        .collect();
    let fan: Vec<_> = pairs.iter().map(|&(a, b)| (p[a], p[b])).collect();
    let g = developability(&p[0], &fan).ok_or(Error::DegenerateFan(iv.vertex))?;
    Ok(LocalTerm::from_jet(LocalTerm::vertex_vars(&slots), &g))
}

pub fn assemble(pattern: &QuadPattern, folded: &FoldedState, mode: ExecMode) -> Result<ConstraintSet> {
    let planar = mode.map(&pattern.quads, |_, q| planarity_row(folded, q));
    let develop = mode
        .map(&pattern.interior, |_, iv| develop_row(pattern, folded, iv))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n_planarity = planar.len();
    let (mut rows, planarity_normalized): (Vec<_>, Vec<_>) = planar.into_iter().unzip();
    rows.extend(develop);
    Ok(ConstraintSet {
        n_vars: 2 * pattern.num_vertices(),
        n_planarity,
        rows,
        planarity_normalized,
    })
}

/// Residuals only, on plain positions.
pub fn residuals(pattern: &QuadPattern, positions: &[[f64; 3]]) -> Result<(Vec<f64>, Vec<f64>)> {
    let planar = pattern
        .quads
        .iter()
        .map(|q| planarity(&positions[q[0]], &positions[q[1]], &positions[q[2]], &positions[q[3]]))
        .collect();
    let develop = pattern
        .interior
        .iter()
        .map(|iv| {
            let fan: Vec<_> = iv
                .fan
                .iter()
                .map(|&(q, c)| {
                    let quad = pattern.quads[q];
                    (positions[quad[(c + 1) % 4]], positions[quad[(c + 3) % 4]])
                })
                .collect();
            developability(&positions[iv.vertex], &fan).ok_or(Error::DegenerateFan(iv.vertex))
        })
        .collect::<Result<_>>()?;
    Ok((planar, develop))
}
