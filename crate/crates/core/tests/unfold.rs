mod common;

use miura_core::pattern::{fold, QuadPattern};
use miura_core::solver::{self, SolveStatus, SolverConfig};
use miura_core::surface::{OffsetPair, Rect, SurfaceChart, SurfaceKind};
use miura_core::unfold::{self, CreaseKind, DEFAULT_PLANARITY_GATE};
use miura_core::ExecMode;

#[test]
fn flat_chart_development_is_rigid_copy_of_rest_pattern() {
    let s = common::setup(SurfaceKind::Flat, (6, 8), 0.0);
    let f = fold(&s.pattern, &s.pair, &s.pattern.vertices0, ExecMode::Sequential).unwrap();
    let d = unfold::develop(&f.positions, &s.pattern.quads, 0, DEFAULT_PLANARITY_GATE).unwrap();
    assert!(d.consistency_error < 1e-12);
    assert!(unfold::rigid_discrepancy(&s.pattern.vertices0, &d.flat_positions) < 1e-12);
    let creases = unfold::classify_creases(&f.positions, &s.pattern.quads).unwrap();
    assert!(creases.iter().all(|c| c.kind == CreaseKind::Flat));
}

#[test]
fn folded_unit_cell_has_three_to_one_creases() {
    let foot = Rect::new([-0.9, 0.9], [-0.9, 0.9]);
    let p = QuadPattern::build((2, 2), &foot, 0.25).unwrap();
    let pair = OffsetPair::new(SurfaceChart::new(SurfaceKind::Flat, Rect::unit_square()), 0.1).unwrap();
    let f = fold(&p, &pair, &p.vertices0, ExecMode::Sequential).unwrap();
    let (gp, gd) = miura_core::constraint::residuals(&p, &f.positions).unwrap();
    assert!(common::max_abs(&gp) < 1e-14 && common::max_abs(&gd) < 1e-14);
    let centre = p.interior[0].vertex;
    let creases = unfold::classify_creases(&f.positions, &p.quads).unwrap();
    let around: Vec<_> = creases.iter().filter(|c| c.edge.contains(&centre)).collect();
    assert_eq!(around.len(), 4);
    let mountains = around.iter().filter(|c| c.kind == CreaseKind::Mountain).count();
    let valleys = around.iter().filter(|c| c.kind == CreaseKind::Valley).count();
    assert!((mountains, valleys) == (3, 1) || (mountains, valleys) == (1, 3), "{mountains} {valleys}");
}

#[test]
fn optimized_wave_develops_consistently_from_any_seed() {
    let s = common::setup(SurfaceKind::wave(), (10, 8), 0.05);
    let out = solver::solve(&s.pattern, &s.pair, &s.model, &SolverConfig::default()).unwrap();
    assert_eq!(out.report.status, SolveStatus::Converged);
    let f = fold(&s.pattern, &s.pair, &out.y, ExecMode::Sequential).unwrap();
    let q = &s.pattern.quads;
    let d0 = unfold::develop(&f.positions, q, 0, DEFAULT_PLANARITY_GATE).unwrap();
    let diam = unfold::bbox_diameter(&f.positions);
    assert!(d0.consistency_error <= 1e-6 * diam);
    assert!(unfold::isometry_error(&d0, &f.positions, q) <= d0.consistency_error + 1e-12);
    for seed in [q.len() / 2, q.len() - 1] {
        let d = unfold::develop(&f.positions, q, seed, DEFAULT_PLANARITY_GATE).unwrap();
        let bound = 2.0 * d0.consistency_error.max(d.consistency_error);
        assert!(unfold::rigid_discrepancy(&d0.flat_positions, &d.flat_positions) <= bound.max(1e-12));
    }
}
