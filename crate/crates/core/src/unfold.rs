//! Development of a planar-quad mesh into the plane and mountain/valley classification.
//!
//! Quads are laid out breadth-first from a seed. Each quad is first expressed in the
//! coordinates of its best-fit plane, oriented so that its corners stay counterclockwise,
//! then moved rigidly onto the already placed image of the edge it shares with its
//! parent. The first placement of a vertex wins; later disagreements are tracked in
//! [`Development::consistency_error`].

use crate::constraint::planarity;
use crate::error::{Error, Result};
use crate::jet::{cross3, dot3, norm3, scale3, sub3};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

/// Default bound on `|g_planarity|` for a quad to be developed.
pub const DEFAULT_PLANARITY_GATE: f64 = 1e-6;
/// Dihedral angles within this distance of `pi` count as flat.
pub const FLAT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CreaseKind {
    Mountain,
    Valley,
    Flat,
}

impl CreaseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mountain => "mountain",
            Self::Valley => "valley",
            Self::Flat => "flat",
        }
    }
}

/// An edge shared by two quads.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crease {
    pub edge: [usize; 2],
    pub quads: [usize; 2],
    /// Angle between the two faces measured on the back (`-n`) side.
    pub dihedral: f64,
    pub kind: CreaseKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Development {
    pub flat_positions: Vec<[f64; 2]>,
    pub consistency_error: f64,
    pub creases: Vec<Crease>,
    pub seed: usize,
}

type EdgeMap = HashMap<(usize, usize), Vec<usize>>;

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn edge_map(quads: &[[usize; 4]]) -> EdgeMap {
    let mut map: EdgeMap = HashMap::new();
    for (qi, q) in quads.iter().enumerate() {
        for k in 0..4 {
            map.entry(edge_key(q[k], q[(k + 1) % 4])).or_default().push(qi);
        }
    }
    map
}

/// Corner coordinates of a quad in its best-fit plane, counterclockwise about the quad normal.
fn local_frame(positions: &[[f64; 3]], quad: &[usize; 4]) -> Result<[[f64; 2]; 4]> {
    let p = quad.map(|v| positions[v]);
    let c = [0, 1, 2].map(|k| p.iter().map(|x| x[k]).sum::<f64>() / 4.0);
    let mut cov = Matrix3::zeros();
    for x in &p {
        let d = Vector3::from(sub3(x, &c));
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let col = |i: usize| -> [f64; 3] {
        let v = eig.eigenvectors.column(order[i]);
        [v[0], v[1], v[2]]
    };
    let u1 = col(0);
    let mut u2 = col(1);
    let normal = quad_normal(positions, quad).ok_or(Error::DegenerateFace(0))?;
    if dot3(&cross3(&u1, &u2), &normal) < 0.0 {
        u2 = scale3(&u2, -1.0);
    }
    Ok(p.map(|x| {
        let d = sub3(&x, &c);
        [dot3(&d, &u1), dot3(&d, &u2)]
    }))
}

/// Unit normal `(c - a) x (d - b)` following the quad's corner order.
pub fn quad_normal(positions: &[[f64; 3]], q: &[usize; 4]) -> Option<[f64; 3]> {
    let [a, b, c, d] = q.map(|v| positions[v]);
    let n = cross3(&sub3(&c, &a), &sub3(&d, &b));
    let len = norm3(&n);
    if len > 1e-300 {
        Some(scale3(&n, 1.0 / len))
    } else {
        None
    }
}

fn rigid_onto(local: &[[f64; 2]; 4], from: (usize, usize), to: ([f64; 2], [f64; 2])) -> [[f64; 2]; 4] {
    let (lp, lq) = (local[from.0], local[from.1]);
    let (pp, pq) = to;
    let ang = (pq[1] - pp[1]).atan2(pq[0] - pp[0]) - (lq[1] - lp[1]).atan2(lq[0] - lp[0]);
    let (s, c) = ang.sin_cos();
    local.map(|x| {
        let d = [x[0] - lp[0], x[1] - lp[1]];
        [pp[0] + c * d[0] - s * d[1], pp[1] + s * d[0] + c * d[1]]
    })
}

/// Develops the mesh from quad `seed`, refusing quads with `|g_planarity| > gate`.
pub fn develop(positions: &[[f64; 3]], quads: &[[usize; 4]], seed: usize, gate: f64) -> Result<Development> {
    if seed >= quads.len() {
        return Err(Error::Internal(format!("seed quad {seed} out of range")));
    }
    for (qi, q) in quads.iter().enumerate() {
        let [a, b, c, d] = q.map(|v| positions[v]);
        let r = planarity(&a, &b, &c, &d);
        if !(r.abs() <= gate) {
            return Err(Error::PlanarityGate {
                quad: qi,
                residual: r,
                gate,
            });
        }
    }
    let frames = quads
        .iter()
        .enumerate()
        .map(|(qi, q)| {
            local_frame(positions, q).map_err(|e| match e {
                Error::DegenerateFace(_) => Error::DegenerateFace(qi),
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = edge_map(quads);

    let mut flat: Vec<Option<[f64; 2]>> = vec![None; positions.len()];
    let mut visited = vec![false; quads.len()];
    let mut err: f64 = 0.0;
    let mut place = |flat: &mut Vec<Option<[f64; 2]>>, q: &[usize; 4], xy: &[[f64; 2]; 4]| {
        for (k, &v) in q.iter().enumerate() {
            match flat[v] {
                None => flat[v] = Some(xy[k]),
                Some(old) => err = err.max((old[0] - xy[k][0]).hypot(old[1] - xy[k][1])),
            }
        }
    };

    place(&mut flat, &quads[seed], &frames[seed]);
    visited[seed] = true;
    let mut queue = VecDeque::from([seed]);
    while let Some(qi) = queue.pop_front() {
        let q = quads[qi];
        for k in 0..4 {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            for &nb in &edges[&edge_key(a, b)] {
                if visited[nb] {
                    continue;
                }
                visited[nb] = true;
                let nq = quads[nb];
                let ia = nq.iter().position(|&v| v == a).unwrap();
                let ib = nq.iter().position(|&v| v == b).unwrap();
                let target = (flat[a].unwrap(), flat[b].unwrap());
                let xy = rigid_onto(&frames[nb], (ia, ib), target);
                place(&mut flat, &nq, &xy);
                queue.push_back(nb);
            }
        }
    }
    if visited.iter().any(|v| !v) {
        return Err(Error::Internal("quad adjacency graph is disconnected".into()));
    }
    let flat_positions = flat.into_iter().map(|p| p.unwrap_or([f64::NAN; 2])).collect();
    Ok(Development {
        flat_positions,
        consistency_error: err,
        creases: classify_creases(positions, quads)?,
        seed,
    })
}

/// Mountain/valley assignment for every edge shared by two quads, in first-seen order.
pub fn classify_creases(positions: &[[f64; 3]], quads: &[[usize; 4]]) -> Result<Vec<Crease>> {
    let edges = edge_map(quads);
    let normals = quads
        .iter()
        .enumerate()
        .map(|(qi, q)| quad_normal(positions, q).ok_or(Error::DegenerateFace(qi)))
        .collect::<Result<Vec<_>>>()?;
    let centroid = |q: &[usize; 4]| [0, 1, 2].map(|k| q.iter().map(|&v| positions[v][k]).sum::<f64>() / 4.0);

    let mut out = Vec::new();
    for q in quads {
        for k in 0..4 {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            let adj = &edges[&edge_key(a, b)];
            if adj.len() != 2 || out.iter().any(|c: &Crease| c.edge == [a.min(b), a.max(b)]) {
                continue;
            }
            let (q1, q2) = (adj[0], adj[1]);
            let (n1, n2) = (normals[q1], normals[q2]);
            let bend = norm3(&cross3(&n1, &n2)).atan2(dot3(&n1, &n2));
            let mid = scale3(&[0, 1, 2].map(|c| positions[a][c] + positions[b][c]), 0.5);
            let side = dot3(&n1, &sub3(&centroid(&quads[q2]), &mid));
            // face q2 dropping below the plane of q1 makes a ridge toward +n
            let dihedral = if side < 0.0 { PI - bend } else { PI + bend };
            let kind = if dihedral < PI - FLAT_TOL {
                CreaseKind::Mountain
            } else if dihedral > PI + FLAT_TOL {
                CreaseKind::Valley
            } else {
                CreaseKind::Flat
            };
            out.push(Crease {
                edge: [a.min(b), a.max(b)],
                quads: [q1, q2],
                dihedral,
                kind,
            });
        }
    }
    Ok(out)
}

/// Largest difference between flat and 3D edge lengths over all quad edges.
pub fn isometry_error(dev: &Development, positions: &[[f64; 3]], quads: &[[usize; 4]]) -> f64 {
    let f = &dev.flat_positions;
    let mut worst: f64 = 0.0;
    for q in quads {
        for k in 0..4 {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            let flat = (f[a][0] - f[b][0]).hypot(f[a][1] - f[b][1]);
            let space = norm3(&sub3(&positions[a], &positions[b]));
            worst = worst.max((flat - space).abs());
        }
    }
    worst
}

/// Residual of the best rotation+translation aligning `b` onto `a` (largest point distance).
pub fn rigid_discrepancy(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let n = a.len() as f64;
    let ca = [0, 1].map(|k| a.iter().map(|p| p[k]).sum::<f64>() / n);
    let cb = [0, 1].map(|k| b.iter().map(|p| p[k]).sum::<f64>() / n);
    let (mut sc, mut ss) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (pa, qb) = ([p[0] - ca[0], p[1] - ca[1]], [q[0] - cb[0], q[1] - cb[1]]);
        sc += pa[0] * qb[0] + pa[1] * qb[1];
        ss += qb[0] * pa[1] - qb[1] * pa[0];
    }
    let ang = ss.atan2(sc);
    let (s, c) = ang.sin_cos();
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let d = [q[0] - cb[0], q[1] - cb[1]];
            let r = [ca[0] + c * d[0] - s * d[1], ca[1] + s * d[0] + c * d[1]];
            (r[0] - p[0]).hypot(r[1] - p[1])
        })
        .fold(0.0, f64::max)
}

/// Diameter of a point set's bounding box.
pub fn bbox_diameter(points: &[[f64; 3]]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    norm3(&sub3(&hi, &lo))
}
