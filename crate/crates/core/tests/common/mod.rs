#![allow(dead_code)]

use miura_core::energy::{EnergyModel, Weights};
use miura_core::pattern::{column_width, QuadPattern, DEFAULT_SKEW_RATIO};
use miura_core::surface::{OffsetPair, Rect, SurfaceChart, SurfaceKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Setup {
    pub pattern: QuadPattern,
    pub pair: OffsetPair,
    pub model: EnergyModel,
}

pub fn setup(kind: SurfaceKind, dims: (usize, usize), epsilon: f64) -> Setup {
    let domain = Rect::new([-1.0, 1.0], [-1.0, 1.0]);
    let foot = domain.scaled(0.9);
    let skew = DEFAULT_SKEW_RATIO * column_width(dims.1, &foot, DEFAULT_SKEW_RATIO);
    let pattern = QuadPattern::build(dims, &foot, skew).unwrap();
    let pair = OffsetPair::new(SurfaceChart::new(kind, domain), epsilon).unwrap();
    let model = EnergyModel::new(&pattern, &pair, Weights::default()).unwrap();
    Setup { pattern, pair, model }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// V0 with every coordinate jittered uniformly by up to `amp`.
pub fn jitter(pattern: &QuadPattern, rng: &mut ChaCha8Rng, amp: f64) -> Vec<[f64; 2]> {
    pattern
        .vertices0
        .iter()
        .map(|v| [v[0] + rng.random_range(-amp..amp), v[1] + rng.random_range(-amp..amp)])
        .collect()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
