//! Sequential vs parallel assembly and a short direct solve.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use miura_core::energy::{EnergyModel, Weights};
use miura_core::pattern::QuadPattern;
use miura_core::solver::{self, SolverConfig};
use miura_core::surface::{OffsetPair, Rect, SurfaceChart, SurfaceKind};
use miura_core::ExecMode;
use std::hint::black_box;

fn setup(dims: (usize, usize)) -> (QuadPattern, OffsetPair, EnergyModel) {
    let domain = Rect::new([-1.0, 1.0], [-1.0, 1.0]);
    let pattern = QuadPattern::build_initial(dims, &domain, 0.02).unwrap();
    let pair = OffsetPair::new(SurfaceChart::new(SurfaceKind::saddle(), domain), 0.05).unwrap();
    let model = EnergyModel::new(&pattern, &pair, Weights::default()).unwrap();
    (pattern, pair, model)
}

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for dims in [(24, 12), (80, 40)] {
        let (pattern, pair, model) = setup(dims);
        let lambda = vec![0.0; pattern.quads.len() + pattern.interior.len()];
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, pattern.quads.len()), &mode, |b, &mode| {
                b.iter(|| solver::evaluate(&pattern, &pair, &model, black_box(&pattern.vertices0), &lambda, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn short_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve-5-iterations");
    group.sample_size(10);
    let (pattern, pair, model) = setup((24, 12));
    for (name, mode) in MODES {
        let cfg = SolverConfig {
            max_iters: 5,
            continuation: false,
            mode,
            ..SolverConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| solver::optimize(&pattern, &pair, &model, &cfg, &pattern.vertices0).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, evaluate, short_solve);
criterion_main!(benches);
