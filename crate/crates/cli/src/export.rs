//! OBJ, SVG and CSV writers, plus the OBJ reader used by `develop` and `report`.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading an
//! exported mesh back gives the exact same values.

use crate::error::{CliError, Result};
use miura_core::surface::Rect;
use miura_core::unfold::{Crease, CreaseKind};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::write(path, contents).map_err(CliError::io(path))
}

/// Quad mesh with 1-based 4-gon faces.
pub fn obj_string(positions: &[[f64; 3]], quads: &[[usize; 4]]) -> String {
    let mut s = String::new();
    for p in positions {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    for q in quads {
        let _ = writeln!(s, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    s
}

pub fn planar_obj_string(points: &[[f64; 2]], quads: &[[usize; 4]]) -> String {
    let lifted: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], 0.0]).collect();
    obj_string(&lifted, quads)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjMesh {
    pub positions: Vec<[f64; 3]>,
    pub quads: Vec<[usize; 4]>,
}

/// Reads vertices and quad faces; `v/t/n` face references are accepted, other records ignored.
pub fn read_obj(path: &Path) -> Result<ObjMesh> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_obj(&text).map_err(|msg| CliError::Artifact {
        path: path.to_path_buf(),
        msg,
    })
}

pub fn parse_obj(text: &str) -> std::result::Result<ObjMesh, String> {
    let mut mesh = ObjMesh {
        positions: Vec::new(),
        quads: Vec::new(),
    };
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| format!("line {}: {e}", ln + 1)))
                    .collect::<std::result::Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", ln + 1));
                }
                mesh.positions.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        match head.parse::<usize>() {
                            Ok(i) if i >= 1 => Ok(i - 1),
                            _ => Err(format!("line {}: bad face index {t:?}", ln + 1)),
                        }
                    })
                    .collect::<std::result::Result<_, _>>()?;
                if idx.len() != 4 {
                    return Err(format!("line {}: only quad faces are supported", ln + 1));
                }
                mesh.quads.push([idx[0], idx[1], idx[2], idx[3]]);
            }
            _ => {}
        }
    }
    let n = mesh.positions.len();
    if mesh.quads.iter().flatten().any(|&i| i >= n) {
        return Err("face references a missing vertex".into());
    }
    if mesh.quads.is_empty() {
        return Err("mesh has no quad faces".into());
    }
    Ok(mesh)
}

/// Maps a rectangle onto a fixed-size SVG canvas with a 2% margin, y pointing up.
struct Viewport {
    rect: Rect,
    scale: f64,
    width: f64,
    height: f64,
}

const CANVAS: f64 = 800.0;

impl Viewport {
    fn new(rect: Rect) -> Self {
        let (w, h) = (rect.width(), rect.height());
        let scale = CANVAS / (w.max(h) * 1.04);
        Self {
            rect,
            scale,
            width: w * 1.04 * scale,
            height: h * 1.04 * scale,
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let mx = 0.02 * self.rect.width();
        let my = 0.02 * self.rect.height();
        (
            (p[0] - self.rect.x[0] + mx) * self.scale,
            (self.rect.y[1] - p[1] + my) * self.scale,
        )
    }

    fn header(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.2}\" height=\"{h:.2}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            w = self.width,
            h = self.height
        )
    }
}

fn polygon(vp: &Viewport, pts: &[[f64; 2]], quad: &[usize; 4], style: &str) -> String {
    let coords: Vec<String> = quad
        .iter()
        .map(|&v| {
            let (x, y) = vp.map(pts[v]);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    format!("<polygon points=\"{}\" {style}/>\n", coords.join(" "))
}

/// Initial pattern in grey under the optimized one, in the frame of the domain `r`.
pub fn parameter_svg(r: &Rect, initial: &[[f64; 2]], optimized: &[[f64; 2]], quads: &[[usize; 4]], lower: &[bool]) -> String {
    let vp = Viewport::new(*r);
    let mut s = vp.header();
    let (x0, y0) = vp.map([r.x[0], r.y[1]]);
    let (x1, y1) = vp.map([r.x[1], r.y[0]]);
    let _ = writeln!(
        s,
        "<rect x=\"{x0:.3}\" y=\"{y0:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>",
        x1 - x0,
        y1 - y0
    );
    s.push_str("<g id=\"initial\">\n");
    for q in quads {
        s.push_str(&polygon(&vp, initial, q, "fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"0.6\""));
    }
    s.push_str("</g>\n<g id=\"optimized\">\n");
    for q in quads {
        s.push_str(&polygon(&vp, optimized, q, "fill=\"none\" stroke=\"#222222\" stroke-width=\"0.8\""));
    }
    s.push_str("</g>\n<g id=\"vertices\">\n");
    for (p, &low) in optimized.iter().zip(lower) {
        let (x, y) = vp.map(*p);
        let color = if low { "#1f5fbf" } else { "#c0392b" };
        let _ = writeln!(s, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.6\" fill=\"{color}\"/>");
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn bounds(points: &[[f64; 2]]) -> Rect {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let pad = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
    Rect::new([lo[0] - pad, hi[0] + pad], [lo[1] - pad, hi[1] + pad])
}

/// Crease pattern: mountains solid red, valleys dashed blue, boundary and flat edges thin grey.
pub fn crease_svg(flat: &[[f64; 2]], quads: &[[usize; 4]], creases: &[Crease]) -> String {
    let vp = Viewport::new(bounds(flat));
    let mut s = vp.header();
    let line = |s: &mut String, a: usize, b: usize, style: &str| {
        let (x1, y1) = vp.map(flat[a]);
        let (x2, y2) = vp.map(flat[b]);
        let _ = writeln!(s, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" {style}/>");
    };
    let interior: std::collections::HashSet<(usize, usize)> =
        creases.iter().map(|c| (c.edge[0].min(c.edge[1]), c.edge[0].max(c.edge[1]))).collect();
    s.push_str("<g id=\"boundary\">\n");
    for q in quads {
        for k in 0..4 {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            if !interior.contains(&(a.min(b), a.max(b))) {
                line(&mut s, a, b, "stroke=\"#888888\" stroke-width=\"0.8\"");
            }
        }
    }
    s.push_str("</g>\n<g id=\"creases\">\n");
    for c in creases {
        let style = match c.kind {
            CreaseKind::Mountain => "class=\"mountain\" stroke=\"#c0392b\" stroke-width=\"1\"",
            CreaseKind::Valley => "class=\"valley\" stroke=\"#1f5fbf\" stroke-width=\"1\" stroke-dasharray=\"4,3\"",
            CreaseKind::Flat => "class=\"flat\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"",
        };
        line(&mut s, c.edge[0], c.edge[1], style);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Solver(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Solver(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
pub struct CreaseRow {
    pub a: usize,
    pub b: usize,
    pub quad_left: usize,
    pub quad_right: usize,
    pub dihedral: f64,
    pub kind: &'static str,
}

pub fn crease_rows(creases: &[Crease]) -> Vec<CreaseRow> {
    creases
        .iter()
        .map(|c| CreaseRow {
            a: c.edge[0],
            b: c.edge[1],
            quad_left: c.quads[0],
            quad_right: c.quads[1],
            dihedral: c.dihedral,
            kind: c.kind.as_str(),
        })
        .collect()
}
