//! Analytic derivatives against central differences of the plain-float code paths.

mod common;

use common::*;
use miura_core::assembly::{flatten, unflatten};
use miura_core::energy::{energy_values, total_energy_folded};
use miura_core::fdcheck::{directional, gradient, jacobian, rel_error};
use miura_core::pattern::fold;
use miura_core::solver::evaluate;
use miura_core::surface::SurfaceKind;
use miura_core::{constraint, ExecMode};

const CONFIGS: usize = 50;

fn term_values(s: &Setup, x: &[f64]) -> [f64; 3] {
    let y = unflatten(x);
    let f = fold(&s.pattern, &s.pair, &y, ExecMode::Sequential).unwrap();
    let v = energy_values(&s.pattern, &f, &s.model).unwrap();
    [v.length, v.mu, v.center]
}

fn all_residuals(s: &Setup, x: &[f64]) -> Vec<f64> {
    let f = fold(&s.pattern, &s.pair, &unflatten(x), ExecMode::Sequential).unwrap();
    let (mut g, d) = constraint::residuals(&s.pattern, &f.positions).unwrap();
    g.extend(d);
    g
}

/// Gradients of each energy term separately, obtained by switching the other weights off.
fn term_gradients(s: &Setup, x: &[f64]) -> [Vec<f64>; 3] {
    let f = fold(&s.pattern, &s.pair, &unflatten(x), ExecMode::Sequential).unwrap();
    std::array::from_fn(|k| {
        let mut m = s.model.clone();
        let w = [&mut m.weights.length, &mut m.weights.mu, &mut m.weights.center];
        for (i, wi) in w.into_iter().enumerate() {
            *wi = if i == k { 1.0 } else { 0.0 };
        }
        total_energy_folded(&s.pattern, &f, &m, ExecMode::Parallel).unwrap().0.grad
    })
}

fn check_surface(kind: SurfaceKind, seed: u64) {
    let s = setup(kind, (4, 6), 0.05);
    let mut rng = rng(seed);
    let (mut worst_grad, mut worst_jac, mut worst_hess) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..CONFIGS {
        let y = jitter(&s.pattern, &mut rng, 0.02);
        let x = flatten(&y);

        let grads = term_gradients(&s, &x);
        for k in 0..3 {
            let fd = gradient(|x| term_values(&s, x)[k], &x, 1e-6);
            worst_grad = worst_grad.max(rel_error(&grads[k], &fd, 1e-12));
        }

        let lambda = random_vec(&mut rng, s.pattern.quads.len() + s.pattern.interior.len());
        let ev = evaluate(&s.pattern, &s.pair, &s.model, &y, &lambda, ExecMode::Parallel).unwrap();
        let jac = ev.constraints.jacobian().to_dense();
        let fd = jacobian(|x| all_residuals(&s, x), &x, 1e-6);
        let scale = jac.iter().map(|r| max_abs(r)).fold(0.0, f64::max);
        for (row, fd_row) in jac.iter().zip(&fd) {
            worst_jac = worst_jac.max(rel_error(row, fd_row, 1e-3 * scale));
        }

        let h = ev.lagrangian_hessian(&lambda);
        let v = random_vec(&mut rng, x.len());
        let hv = h.matvec(&v);
        let grad_l = |x: &[f64]| evaluate(&s.pattern, &s.pair, &s.model, &unflatten(x), &lambda, ExecMode::Sequential).unwrap().grad_l;
        let fd = directional(grad_l, &x, &v, 1e-5);
        worst_hess = worst_hess.max(rel_error(&hv, &fd, 1e-12));
    }
    println!("{}: grad {worst_grad:.2e} jac {worst_jac:.2e} hess {worst_hess:.2e}", kind.name());
    assert!(worst_grad < 1e-6, "{} energy gradient error {worst_grad:e}", kind.name());
    assert!(worst_jac < 1e-6, "{} jacobian error {worst_jac:e}", kind.name());
    assert!(worst_hess < 1e-4, "{} hessian error {worst_hess:e}", kind.name());
}

#[test]
fn saddle_derivatives() {
    check_surface(SurfaceKind::saddle(), 1);
}

#[test]
fn bowl_derivatives() {
    check_surface(SurfaceKind::bowl(), 2);
}

#[test]
fn wave_derivatives() {
    check_surface(SurfaceKind::wave(), 3);
}

#[test]
fn tunnel_derivatives() {
    check_surface(SurfaceKind::tunnel(), 4);
}

#[test]
fn helicoid_derivatives() {
    check_surface(SurfaceKind::helicoid(), 5);
}

#[test]
fn energy_hessians_are_symmetric() {
    let s = setup(SurfaceKind::saddle(), (4, 6), 0.05);
    let y = jitter(&s.pattern, &mut rng(9), 0.02);
    let ev = evaluate(&s.pattern, &s.pair, &s.model, &y, &vec![0.3; 4 * 6 + 3 * 5], ExecMode::Parallel).unwrap();
    assert_eq!(ev.energy.hess.to_csr().asymmetry(), 0.0);
    assert_eq!(ev.lagrangian_hessian(&vec![0.3; 39]).asymmetry(), 0.0);
}
