//! Property tests for the conformality and constraint measures.

mod common;

use miura_core::constraint::{self, developability, planarity};
use miura_core::pattern::{fold, QuadPattern};
use miura_core::qc;
use miura_core::surface::{Rect, SurfaceKind};
use miura_core::ExecMode;
use proptest::prelude::*;

fn pattern() -> QuadPattern {
    QuadPattern::build((4, 5), &Rect::new([-0.9, 0.9], [-0.9, 0.9]), 0.08).unwrap()
}

fn affine(y: &[[f64; 2]], m: [f64; 4], t: [f64; 2]) -> Vec<[f64; 2]> {
    y.iter().map(|p| [m[0] * p[0] + m[1] * p[1] + t[0], m[2] * p[0] + m[3] * p[1] + t[1]]).collect()
}

fn rotate3(p: &[[f64; 3]], ax: f64, az: f64, t: [f64; 3]) -> Vec<[f64; 3]> {
    let (sa, ca) = ax.sin_cos();
    let (sz, cz) = az.sin_cos();
    p.iter()
        .map(|v| {
            let r = [v[0], ca * v[1] - sa * v[2], sa * v[1] + ca * v[2]];
            [cz * r[0] - sz * r[1] + t[0], sz * r[0] + cz * r[1] + t[1], r[2] + t[2]]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarities_are_conformal(s in 0.2f64..3.0, ang in -3.1f64..3.1, tx in -1.0f64..1.0, ty in -1.0f64..1.0) {
        let p = pattern();
        let (sn, cs) = ang.sin_cos();
        let y = affine(&p.vertices0, [s * cs, -s * sn, s * sn, s * cs], [tx, ty]);
        let b = qc::beltrami(&p, &y).unwrap();
        prop_assert!(b.max_abs < 1e-12);
    }

    #[test]
    fn uniform_affine_map_has_constant_mu(a in 0.3f64..2.0, d in 0.3f64..2.0, b in -0.2f64..0.2) {
        let p = pattern();
        let y = affine(&p.vertices0, [a, b, 0.0, d], [0.0, 0.0]);
        let f = qc::beltrami(&p, &y).unwrap();
        let expect = qc::mu_from_affine([a, b, 0.0, d]);
        for m in &f.mu {
            prop_assert!((m - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn reflection_inverts_modulus(a in 0.3f64..2.0, d in 0.3f64..2.0) {
        let p = pattern();
        let y = affine(&p.vertices0, [a, 0.0, 0.0, d], [0.0, 0.0]);
        let r = affine(&y, [-1.0, 0.0, 0.0, 1.0], [0.0, 0.0]);
        let (f, g) = (qc::beltrami(&p, &y).unwrap(), qc::beltrami(&p, &r).unwrap());
        for (m, n) in f.mu.iter().zip(&g.mu) {
            if m.norm() > 1e-9 {
                prop_assert!((m.norm() * n.norm() - 1.0).abs() < 1e-9);
            } else {
                prop_assert!(n.norm() > 1e6);
            }
        }
        prop_assert_eq!(g.foldovers, p.tris.len());
    }

    #[test]
    fn planarity_scales_cubically_and_defect_is_scale_free(s in 0.1f64..10.0, seed in 0u64..1000) {
        let mut rng = common::rng(seed);
        let pts = common::random_vec(&mut rng, 15);
        let v: Vec<[f64; 3]> = pts.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let sv: Vec<[f64; 3]> = v.iter().map(|p| p.map(|c| c * s)).collect();
        let g = planarity(&v[0], &v[1], &v[2], &v[3]);
        let gs = planarity(&sv[0], &sv[1], &sv[2], &sv[3]);
        prop_assert!((gs - s.powi(3) * g).abs() <= 1e-12 * s.powi(3).max(1.0) * g.abs().max(1.0));
        let fan = |w: &[[f64; 3]]| vec![(w[1], w[2]), (w[2], w[3]), (w[3], w[4]), (w[4], w[1])];
        let d = developability(&v[0], &fan(&v)).unwrap();
        let ds = developability(&sv[0], &fan(&sv)).unwrap();
        prop_assert!((d - ds).abs() < 1e-12);
    }

    #[test]
    fn residuals_are_rigid_invariant(ax in -3.0f64..3.0, az in -3.0f64..3.0, t in prop::array::uniform3(-2.0f64..2.0)) {
        let s = common::setup(SurfaceKind::saddle(), (4, 5), 0.05);
        let mut rng = common::rng(7);
        let y = common::jitter(&s.pattern, &mut rng, 0.02);
        let f = fold(&s.pattern, &s.pair, &y, ExecMode::Sequential).unwrap();
        let (gp, gd) = constraint::residuals(&s.pattern, &f.positions).unwrap();
        let moved = rotate3(&f.positions, ax, az, t);
        let (hp, hd) = constraint::residuals(&s.pattern, &moved).unwrap();
        for (a, b) in gp.iter().zip(&hp) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in gd.iter().zip(&hd) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn saddle_patterns_have_nondegenerate_residual_rows() {
    let s = common::setup(SurfaceKind::saddle(), (6, 6), 0.05);
    let f = fold(&s.pattern, &s.pair, &s.pattern.vertices0, ExecMode::Sequential).unwrap();
    let c = constraint::assemble(&s.pattern, &f, ExecMode::Parallel).unwrap();
    assert_eq!(c.len(), 36 + 25);
    assert_eq!(c.n_planarity, 36);
    assert!(c.rows.iter().all(|r| r.grad.iter().any(|g| g.abs() > 0.0)));
}
