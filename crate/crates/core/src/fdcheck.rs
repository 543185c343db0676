//! Central finite differences for checking analytic derivatives.
//!
//! These routines only ever call the plain `f64` functions they are given, so they
//! stay independent of the jet-based derivative code they are used to validate.

/// Central-difference gradient of `f` at `x`.
pub fn gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian, one inner vector per output component.
pub fn jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut xp = x.to_vec();
    let cols: Vec<Vec<f64>> = (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect();
    let m = cols.first().map_or(0, |c| c.len());
    (0..m).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
}

/// Central difference of a vector function along direction `v`.
pub fn directional(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, d)| a + h * d).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, d)| a - h * d).collect();
    f(&xp).iter().zip(&f(&xm)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

/// `|a - b|_inf / |b|_inf`, with `floor` guarding the denominator.
pub fn rel_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = b.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(floor);
    diff / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[0] * x[1];
        let g = gradient(f, &[1.0, 2.0], 1e-4);
        assert!(rel_error(&g, &[8.0, 3.0], 1e-300) < 1e-10);
        let j = jacobian(|x: &[f64]| vec![x[0] * x[1], x[1]], &[2.0, 5.0], 1e-4);
        assert!(rel_error(&j[0], &[5.0, 2.0], 1e-300) < 1e-10);
        assert!(rel_error(&j[1], &[0.0, 1.0], 1e-300) < 1e-10);
        let d = directional(|x: &[f64]| vec![x[0] * x[0]], &[1.0], &[2.0], 1e-4);
        assert!((d[0] - 4.0).abs() < 1e-9);
    }
}
