//! Initial Miura parameter pattern and its folded embedding in the offset band.

use crate::error::{Error, Result};
use crate::jet::{value3, Jet, V3};
use crate::par::ExecMode;
use crate::surface::{OffsetPair, Rect, Side};

/// Fraction of each domain extent covered by the default pattern footprint.
pub const DEFAULT_FILL: f64 = 0.9;
/// Default row skew as a fraction of the column width.
pub const DEFAULT_SKEW_RATIO: f64 = 0.3;

/// An interior vertex with its incident quads in counterclockwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorVertex {
    pub vertex: usize,
    /// `(quad index, local corner of the vertex in that quad)`.
    pub fan: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadPattern {
    /// Quad rows `m`.
    pub rows: usize,
    /// Quad columns `n`.
    pub cols: usize,
    pub skew: f64,
    pub vertices0: Vec<[f64; 2]>,
    /// Counterclockwise `(a, b, c, d)` in the parameter plane.
    pub quads: Vec<[usize; 4]>,
    pub tris: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub interior: Vec<InteriorVertex>,
    /// True for vertices on the lower offset surface (odd columns).
    pub lower_mask: Vec<bool>,
}

/// Column width that leaves room for a skew of `ratio * width` inside `footprint`.
pub fn column_width(cols: usize, footprint: &Rect, ratio: f64) -> f64 {
    footprint.width() / (cols as f64 + ratio.abs())
}

impl QuadPattern {
    /// Pattern covering the centered default fraction of `domain`.
    pub fn build_initial(dims: (usize, usize), domain: &Rect, skew: f64) -> Result<Self> {
        Self::build(dims, &domain.scaled(DEFAULT_FILL), skew)
    }

    /// Pattern whose bounding box is exactly `footprint`; odd rows are shifted by `skew`.
    pub fn build(dims: (usize, usize), footprint: &Rect, skew: f64) -> Result<Self> {
        let (m, n) = dims;
        if m < 2 || n < 2 {
            return Err(Error::InvalidPattern(format!(
                "pattern needs at least 2x2 quads, got {m}x{n}"
            )));
        }
        if !footprint.is_valid() || !skew.is_finite() {
            return Err(Error::InvalidPattern("invalid footprint or skew".into()));
        }
        let w = (footprint.width() - skew.abs()) / n as f64;
        let h = footprint.height() / m as f64;
        if skew.abs() >= w {
            return Err(Error::InvalidPattern(format!(
                "skew {skew} must be smaller than the column width {w}"
            )));
        }
        let x0 = footprint.x[0] + (-skew).max(0.0);
        let y0 = footprint.y[0];
        let idx = |i: usize, j: usize| i * (n + 1) + j;

        let mut vertices0 = Vec::with_capacity((m + 1) * (n + 1));
        let mut lower_mask = Vec::with_capacity((m + 1) * (n + 1));
        for i in 0..=m {
            for j in 0..=n {
                let shift = if i % 2 == 1 { skew } else { 0.0 };
                vertices0.push([x0 + j as f64 * w + shift, y0 + i as f64 * h]);
                lower_mask.push(j % 2 == 1);
            }
        }

        let mut quads = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                quads.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j)]);
            }
        }

        let mut edges = Vec::with_capacity(m * (n + 1) + n * (m + 1));
        for i in 0..=m {
            for j in 0..n {
                edges.push([idx(i, j), idx(i, j + 1)]);
            }
        }
        for i in 0..m {
            for j in 0..=n {
                edges.push([idx(i, j), idx(i + 1, j)]);
            }
        }

        let q = |i: usize, j: usize| i * n + j;
        let mut interior = Vec::with_capacity((m - 1) * (n - 1));
        for i in 1..m {
            for j in 1..n {
                interior.push(InteriorVertex {
                    vertex: idx(i, j),
                    fan: vec![(q(i, j), 0), (q(i, j - 1), 1), (q(i - 1, j - 1), 2), (q(i - 1, j), 3)],
                });
            }
        }

        let mut pattern = Self {
            rows: m,
            cols: n,
            skew,
            vertices0,
            quads,
            tris: Vec::new(),
            edges,
            interior,
            lower_mask,
        };
        pattern.triangulate();
        Ok(pattern)
    }

    /// Splits every quad along its shorter diagonal in the rest configuration; ties use `(a, c)`.
    pub fn triangulate(&mut self) {
        let v = &self.vertices0;
        let d2 = |p: usize, q: usize| {
            let (a, b) = (v[p], v[q]);
            (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
        };
        self.tris = self
            .quads
            .iter()
            .flat_map(|&[a, b, c, d]| {
                let (ac, bd) = (d2(a, c), d2(b, d));
                if bd < ac * (1.0 - 1e-12) {
                    [[a, b, d], [b, c, d]]
                } else {
                    [[a, b, c], [a, c, d]]
                }
            })
            .collect();
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices0.len()
    }

    pub fn side(&self, vertex: usize) -> Side {
        if self.lower_mask[vertex] {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    /// Number of quads incident to each vertex.
    pub fn vertex_valence(&self) -> Vec<usize> {
        let mut val = vec![0; self.num_vertices()];
        for q in &self.quads {
            for &v in q {
                val[v] += 1;
            }
        }
        val
    }

    /// Centroid of the bounding box of the rest vertices.
    pub fn rest_center(&self) -> [f64; 2] {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.vertices0 {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]
    }
}

/// The folded pattern `P(f)` for a planar configuration `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldedState {
    pub positions: Vec<[f64; 3]>,
    pub source_y: Vec<[f64; 2]>,
    /// Per-vertex offset-map jets: value, 3x2 Jacobian and second derivatives in `y_i`.
    pub jets: Vec<V3<Jet<2>>>,
}

pub fn fold(pattern: &QuadPattern, pair: &OffsetPair, y: &[[f64; 2]], mode: ExecMode) -> Result<FoldedState> {
    if y.len() != pattern.num_vertices() {
        return Err(Error::Internal(format!(
            "configuration has {} points, pattern has {} vertices",
            y.len(),
            pattern.num_vertices()
        )));
    }
    let jets = mode
        .map(y, |i, &p| pair.offset_jet(pattern.side(i), p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldedState {
        positions: jets.iter().map(value3).collect(),
        source_y: y.to_vec(),
        jets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{SurfaceChart, SurfaceKind};

    fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    #[test]
    fn small_grid_counts() {
        let p = QuadPattern::build_initial((2, 2), &Rect::new([0.0, 1.0], [0.0, 1.0]), 0.0).unwrap();
        assert_eq!(p.vertices0.len(), 9);
        assert_eq!(p.quads.len(), 4);
        assert_eq!(p.tris.len(), 8);
        assert_eq!(p.edges.len(), 12);
        assert_eq!(p.interior.len(), 1);
        assert_eq!(p.interior[0].vertex, 4);
        // regular grid
        let xs: Vec<f64> = p.vertices0[..3].iter().map(|v| v[0]).collect();
        assert!((xs[1] - xs[0] - (xs[2] - xs[1])).abs() < 1e-15);
        assert_eq!(p.vertices0[3][0], p.vertices0[0][0]);
    }

    #[test]
    fn skew_shifts_odd_rows_only() {
        let r = Rect::new([0.0, 1.0], [0.0, 1.0]);
        let flat = QuadPattern::build_initial((2, 2), &r, 0.0).unwrap();
        let p = QuadPattern::build_initial((2, 2), &r, 0.1).unwrap();
        let d = |k: usize| p.vertices0[k][0] - p.vertices0[k - 3 * (k / 3)][0];
        for j in 0..3 {
            assert!((d(3 + j) - 0.1).abs() < 1e-15);
            assert_eq!(p.vertices0[6 + j][0], p.vertices0[j][0]);
        }
        assert!((flat.vertices0[4][0] - 0.5).abs() < 1e-15 && (flat.vertices0[4][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn medium_grid_counts() {
        let p = QuadPattern::build_initial((12, 12), &Rect::unit_square(), 0.02).unwrap();
        assert_eq!(p.quads.len(), 144);
        assert_eq!(p.edges.len(), 312);
        assert_eq!(p.interior.len(), 121);
    }

    #[test]
    fn invalid_patterns() {
        let r = Rect::unit_square();
        assert!(QuadPattern::build_initial((1, 4), &r, 0.0).is_err());
        assert!(QuadPattern::build_initial((4, 4), &r, 0.5).is_err());
        assert!(QuadPattern::build_initial((4, 4), &r, -0.5).is_err());
    }

    #[test]
    fn tie_and_short_diagonal_rules() {
        let r = Rect::new([0.0, 1.0], [0.0, 1.0]);
        let p = QuadPattern::build((2, 2), &r, 0.0).unwrap();
        let [a, _, c, _] = p.quads[0];
        assert_eq!(p.tris[0], [a, p.quads[0][1], c]);
        let p = QuadPattern::build((2, 2), &r, 0.1).unwrap();
        // row 0 quads lean right: b-d is shorter
        let [a, b, _, d] = p.quads[0];
        assert_eq!(p.tris[0], [a, b, d]);
        // row 1 quads lean left: a-c is shorter
        let [a, b, c, _] = p.quads[2];
        assert_eq!(p.tris[4], [a, b, c]);
    }

    #[test]
    fn triangles_and_quads_positive() {
        let p = QuadPattern::build_initial((5, 7), &Rect::unit_square(), -0.05).unwrap();
        for t in &p.tris {
            let v = &p.vertices0;
            assert!(signed_area(v[t[0]], v[t[1]], v[t[2]]) > 0.0);
        }
        for q in &p.quads {
            let v = &p.vertices0;
            for k in 0..4 {
                assert!(signed_area(v[q[k]], v[q[(k + 1) % 4]], v[q[(k + 2) % 4]]) > 0.0);
            }
        }
    }

    #[test]
    fn fold_on_flat_chart() {
        let chart = SurfaceChart::new(SurfaceKind::Flat, Rect::unit_square());
        let pair = OffsetPair::new(chart, 0.05).unwrap();
        let p = QuadPattern::build_initial((3, 4), &Rect::unit_square(), 0.03).unwrap();
        let f = fold(&p, &pair, &p.vertices0, ExecMode::Sequential).unwrap();
        for (i, x) in f.positions.iter().enumerate() {
            let z = if p.lower_mask[i] { -0.05 } else { 0.05 };
            assert_eq!(*x, [p.vertices0[i][0], p.vertices0[i][1], z]);
        }
    }

    #[test]
    fn fold_is_vertex_local() {
        let chart = SurfaceChart::new(SurfaceKind::saddle(), Rect::unit_square());
        let pair = OffsetPair::new(chart, 0.05).unwrap();
        let p = QuadPattern::build_initial((3, 4), &Rect::unit_square(), 0.03).unwrap();
        let f0 = fold(&p, &pair, &p.vertices0, ExecMode::Sequential).unwrap();
        let mut y = p.vertices0.clone();
        y[7][0] += 0.01;
        let f1 = fold(&p, &pair, &y, ExecMode::Parallel).unwrap();
        for i in 0..y.len() {
            assert_eq!(f0.positions[i] == f1.positions[i], i != 7);
        }
    }

    #[test]
    fn fold_rejects_points_outside_domain() {
        let chart = SurfaceChart::new(SurfaceKind::saddle(), Rect::unit_square());
        let pair = OffsetPair::new(chart, 0.05).unwrap();
        let p = QuadPattern::build_initial((3, 4), &Rect::unit_square(), 0.03).unwrap();
        let mut y = p.vertices0.clone();
        y[0] = [-1.5, 0.0];
        assert!(matches!(
            fold(&p, &pair, &y, ExecMode::Sequential),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
