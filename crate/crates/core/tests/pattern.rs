use miura_core::pattern::{column_width, fold, QuadPattern};
use miura_core::surface::{OffsetPair, Rect, SurfaceChart, SurfaceKind};
use miura_core::ExecMode;
use std::collections::HashSet;

fn foot() -> Rect {
    Rect::new([-0.9, 0.9], [-0.9, 0.9])
}

#[test]
fn counts_for_all_small_dims() {
    for m in 2..=40 {
        for n in 2..=40 {
            let w = column_width(n, &foot(), 0.3);
            let p = QuadPattern::build((m, n), &foot(), 0.3 * w).unwrap();
            assert_eq!(p.num_vertices(), (m + 1) * (n + 1));
            assert_eq!(p.quads.len(), m * n);
            assert_eq!(p.tris.len(), 2 * m * n);
            assert_eq!(p.edges.len(), m * (n + 1) + n * (m + 1));
            assert_eq!(p.interior.len(), (m - 1) * (n - 1));
            assert!(p.interior.iter().all(|iv| iv.fan.len() == 4));
        }
    }
}

#[test]
fn edges_are_unique_and_cover_quad_sides() {
    let p = QuadPattern::build((7, 9), &foot(), 0.05).unwrap();
    let set: HashSet<_> = p.edges.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
    assert_eq!(set.len(), p.edges.len());
    for q in &p.quads {
        for k in 0..4 {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            assert!(set.contains(&(a.min(b), a.max(b))));
        }
    }
}

#[test]
fn footprint_is_exact_and_columns_alternate() {
    let w = column_width(8, &foot(), 0.3);
    let p = QuadPattern::build((6, 8), &foot(), 0.3 * w).unwrap();
    let xs = p.vertices0.iter().map(|v| v[0]);
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    assert!((lo + 0.9).abs() < 1e-12 && (hi - 0.9).abs() < 1e-12);
    for i in 0..=6 {
        for j in 0..=8 {
            assert_eq!(p.lower_mask[i * 9 + j], j % 2 == 1);
        }
    }
}

#[test]
fn fold_modes_agree() {
    let p = QuadPattern::build((10, 12), &foot(), 0.04).unwrap();
    let pair = OffsetPair::new(SurfaceChart::new(SurfaceKind::bowl(), Rect::unit_square()), 0.05).unwrap();
    let a = fold(&p, &pair, &p.vertices0, ExecMode::Sequential).unwrap();
    let b = fold(&p, &pair, &p.vertices0, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
}
