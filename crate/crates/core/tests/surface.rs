use miura_core::fdcheck;
use miura_core::jet::{cross3, dot3, norm3};
use miura_core::surface::{OffsetPair, Rect, Side, SurfaceChart, SurfaceKind};

fn all_kinds() -> Vec<SurfaceKind> {
    let mut v = vec![SurfaceKind::Flat];
    v.extend(SurfaceKind::curved_families());
    v
}

fn grid(n: usize) -> Vec<[f64; 2]> {
    let t = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
    (0..n).flat_map(|i| (0..n).map(move |j| [t(i), t(j)])).collect()
}

#[test]
fn tangents_match_finite_differences() {
    for kind in all_kinds() {
        let chart = SurfaceChart::new(kind, Rect::unit_square());
        for p in grid(9) {
            // keep the stencil inside the domain
            let p = [p[0] * 0.99, p[1] * 0.99];
            let sp = chart.evaluate(p).unwrap();
            let fd = fdcheck::jacobian(|x: &[f64]| chart.evaluate([x[0], x[1]]).unwrap().position.to_vec(), &p, 1e-6);
            for c in 0..3 {
                for k in 0..2 {
                    assert!((sp.d1[k][c] - fd[c][k]).abs() < 1e-8, "{} d{k} at {p:?}", kind.name());
                }
            }
            let d2 = fdcheck::jacobian(
                |x: &[f64]| {
                    let s = chart.evaluate([x[0], x[1]]).unwrap();
                    s.d1[0].iter().chain(&s.d1[1]).copied().collect()
                },
                &p,
                1e-6,
            );
            for c in 0..3 {
                assert!((sp.d2[0][c] - d2[c][0]).abs() < 1e-6);
                assert!((sp.d2[1][c] - d2[c][1]).abs() < 1e-6);
                assert!((sp.d2[1][c] - d2[3 + c][0]).abs() < 1e-6);
                assert!((sp.d2[2][c] - d2[3 + c][1]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn normals_are_unit_and_orthogonal_on_dense_grid() {
    for kind in all_kinds() {
        let chart = SurfaceChart::new(kind, Rect::unit_square());
        for p in grid(50) {
            let sp = chart.evaluate(p).unwrap();
            let nf = chart.normal(p).unwrap();
            assert!((norm3(&nf.n) - 1.0).abs() < 1e-12);
            assert!(dot3(&nf.n, &sp.d1[0]).abs() < 1e-12);
            assert!(dot3(&nf.n, &sp.d1[1]).abs() < 1e-12);
            // orientation follows phi_x x phi_y
            assert!(dot3(&nf.n, &cross3(&sp.d1[0], &sp.d1[1])) > 0.0);
        }
    }
}

#[test]
fn normal_partials_match_finite_differences() {
    for kind in SurfaceKind::curved_families() {
        let chart = SurfaceChart::new(kind, Rect::unit_square());
        for p in grid(7) {
            let p = [p[0] * 0.99, p[1] * 0.99];
            let nf = chart.normal(p).unwrap();
            let fd = fdcheck::jacobian(|x: &[f64]| chart.normal([x[0], x[1]]).unwrap().n.to_vec(), &p, 1e-6);
            for c in 0..3 {
                for k in 0..2 {
                    assert!((nf.dn[k][c] - fd[c][k]).abs() < 1e-7);
                }
            }
        }
    }
}

#[test]
fn offset_surfaces_sit_at_distance_epsilon() {
    for kind in SurfaceKind::curved_families() {
        let pair = OffsetPair::new(SurfaceChart::new(kind, Rect::unit_square()), 0.05).unwrap();
        for p in grid(11) {
            let base = pair.chart.evaluate(p).unwrap().position;
            for side in [Side::Upper, Side::Lower] {
                let off = pair.offset_evaluate(side, p).unwrap().position;
                let d = [off[0] - base[0], off[1] - base[1], off[2] - base[2]];
                assert!((norm3(&d) - 0.05).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn blended_chart_interpolates_to_plane() {
    let chart = SurfaceChart::new(SurfaceKind::saddle(), Rect::unit_square());
    let p = [0.3, -0.7];
    let flat = chart.with_blend(0.0).evaluate(p).unwrap();
    assert_eq!(flat.position, [0.3, -0.7, 0.0]);
    let half = chart.with_blend(0.5).evaluate(p).unwrap().position;
    let full = chart.evaluate(p).unwrap().position;
    assert!((half[2] - 0.5 * full[2]).abs() < 1e-15);
}

#[test]
fn curvature_signs() {
    let sq = Rect::unit_square();
    let (k1, k2) = SurfaceChart::new(SurfaceKind::saddle(), sq).principal_curvatures([0.0, 0.0]).unwrap();
    assert!((k1 - 1.0).abs() < 1e-12 && (k2 + 1.0).abs() < 1e-12);
    let (k1, k2) = SurfaceChart::new(SurfaceKind::tunnel(), sq).principal_curvatures([0.2, 0.1]).unwrap();
    // cylinder of radius 1: one zero and one unit curvature
    assert!(k1.abs().max(k2.abs()) > 0.999 && k1.abs().min(k2.abs()) < 1e-12);
}
