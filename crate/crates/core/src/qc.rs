//! Discrete Beltrami coefficients of the planar map from the rest pattern to `y`.
//!
//! On each triangle the map is affine, `f(x, y) = (a x + b y + r, c x + d y + q)`, so
//! `f_x = a + i c` and `f_y = b + i d`. The coefficients come from the 2x2 system whose
//! rows are the rest edge vectors `e1 = beta - alpha`, `e2 = gamma - alpha`, and
//!
//! ```text
//! mu = ((a - d) + i (c + b)) / ((a + d) + i (c - b)).
//! ```

use crate::assembly::{EnergyTerm, LocalTerm};
use crate::error::{Error, Result};
use crate::jet::{Jet, Real};
use crate::par::ExecMode;
use crate::pattern::QuadPattern;
use num_complex::Complex64;

/// Regularizer added to `|den|^2` in the energy so it stays finite at degenerate maps.
pub const POLE_GUARD: f64 = 1e-18;

const MIN_REST_AREA: f64 = 1e-14;

/// Affine coefficients `(a, b, c, d)` of the map sending `rest` onto `image`.
pub fn triangle_affine_generic<T: Real>(rest: &[[f64; 2]; 3], image: &[[T; 2]; 3]) -> Option<[T; 4]> {
    let e1 = [rest[1][0] - rest[0][0], rest[1][1] - rest[0][1]];
    let e2 = [rest[2][0] - rest[0][0], rest[2][1] - rest[0][1]];
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    if (0.5 * det).abs() <= MIN_REST_AREA {
        return None;
    }
    let inv = 1.0 / det;
    let du1 = image[1][0] - image[0][0];
    let du2 = image[2][0] - image[0][0];
    let dv1 = image[1][1] - image[0][1];
    let dv2 = image[2][1] - image[0][1];
    let a = du1 * (e2[1] * inv) + du2 * (-e1[1] * inv);
    let b = du2 * (e1[0] * inv) + du1 * (-e2[0] * inv);
    let c = dv1 * (e2[1] * inv) + dv2 * (-e1[1] * inv);
    let d = dv2 * (e1[0] * inv) + dv1 * (-e2[0] * inv);
    Some([a, b, c, d])
}

pub fn triangle_affine(rest: &[[f64; 2]; 3], image: &[[f64; 2]; 3]) -> Result<[f64; 4]> {
    triangle_affine_generic(rest, image).ok_or(Error::SingularTriangle(0))
}

/// `mu = f_zbar / f_z`; infinite when `f_z = 0` (anticonformal or collapsed maps).
pub fn mu_from_affine([a, b, c, d]: [f64; 4]) -> Complex64 {
    let den = Complex64::new(a + d, c - b);
    if den.norm_sqr() == 0.0 {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    Complex64::new(a - d, c + b) / den
}

/// `|mu|^2` with the pole guard in the denominator.
pub fn mu_sq_guarded<T: Real>([a, b, c, d]: [T; 4]) -> T {
    let num = (a - d).powi2() + (c + b).powi2();
    let den = (a + d).powi2() + (c - b).powi2();
    num / (den + POLE_GUARD)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeltramiField {
    pub mu: Vec<Complex64>,
    pub grad_coeffs: Vec<[f64; 4]>,
    pub mean_abs: f64,
    pub max_abs: f64,
    /// Triangles with `|mu| >= 1`.
    pub foldovers: usize,
}

fn rest_tri(pattern: &QuadPattern, t: &[usize; 3]) -> [[f64; 2]; 3] {
    [pattern.vertices0[t[0]], pattern.vertices0[t[1]], pattern.vertices0[t[2]]]
}

pub fn beltrami(pattern: &QuadPattern, y: &[[f64; 2]]) -> Result<BeltramiField> {
    beltrami_on(&pattern.vertices0, &pattern.tris, y)
}

/// Beltrami field of the map `rest -> image` on an arbitrary triangulation.
pub fn beltrami_on(rest: &[[f64; 2]], tris: &[[usize; 3]], image: &[[f64; 2]]) -> Result<BeltramiField> {
    let mut grad_coeffs = Vec::with_capacity(tris.len());
    let mut mu = Vec::with_capacity(tris.len());
    for (k, t) in tris.iter().enumerate() {
        let r = [rest[t[0]], rest[t[1]], rest[t[2]]];
        let im = [image[t[0]], image[t[1]], image[t[2]]];
        let coeffs = triangle_affine_generic(&r, &im).ok_or(Error::SingularTriangle(k))?;
        grad_coeffs.push(coeffs);
        mu.push(mu_from_affine(coeffs));
    }
    let abs: Vec<f64> = mu.iter().map(|m| m.norm()).collect();
    let n = abs.len().max(1) as f64;
    Ok(BeltramiField {
        mean_abs: abs.iter().sum::<f64>() / n,
        max_abs: abs.iter().copied().fold(0.0, f64::max),
        foldovers: abs.iter().filter(|&&m| m >= 1.0).count(),
        mu,
        grad_coeffs,
    })
}

/// Per-triangle `|mu_t|^2` terms over the six coordinates of the triangle's vertices.
pub fn mu_terms(pattern: &QuadPattern, y: &[[f64; 2]], mode: ExecMode) -> Result<Vec<LocalTerm>> {
    mode.map(&pattern.tris, |k, t| {
        let rest = rest_tri(pattern, t);
        let image: [[Jet<6>; 2]; 3] = std::array::from_fn(|v| {
            [
                Jet::variable(y[t[v]][0], 2 * v),
                Jet::variable(y[t[v]][1], 2 * v + 1),
            ]
        });
        let coeffs = triangle_affine_generic(&rest, &image).ok_or(Error::SingularTriangle(k))?;
        Ok(LocalTerm::from_jet(LocalTerm::vertex_vars(t), &mu_sq_guarded(coeffs)))
    })
    .into_iter()
    .collect()
}

/// `E_mu = (1/|T|) sum |mu_t|^2` with gradient and Hessian.
pub fn energy_mu(pattern: &QuadPattern, y: &[[f64; 2]], mode: ExecMode) -> Result<EnergyTerm> {
    let terms = mu_terms(pattern, y, mode)?;
    let mut e = EnergyTerm::zero(2 * pattern.num_vertices());
    e.accumulate(&terms, 1.0 / pattern.tris.len() as f64);
    Ok(e)
}

/// Maximal dilation `(1 + |mu|) / (1 - |mu|)`; infinite once `|mu| >= 1`.
pub fn dilation(max_mu: f64) -> f64 {
    if max_mu >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + max_mu) / (1.0 - max_mu)
    }
}
