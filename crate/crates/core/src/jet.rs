//! Second-order forward-mode differentiation.
//!
//! A [`Jet<N>`] carries a value together with its gradient and Hessian with respect
//! to `N` local variables. Every smooth term in the optimization (offset maps, edge
//! lengths, Beltrami energies, planarity and angle-defect constraints) is written once
//! against the [`Real`] trait and evaluated either on plain `f64` or on jets.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and [`Jet`].
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn powi2(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// Value, gradient and Hessian of a scalar with respect to `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    /// The `i`-th independent variable at value `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Embeds a two-variable jet into slot `slot`, i.e. variables `2*slot` and `2*slot + 1`.
    pub fn lift(src: &Jet<2>, slot: usize) -> Self {
        let mut j = Self::constant(src.v);
        let base = 2 * slot;
        j.g[base] = src.g[0];
        j.g[base + 1] = src.g[1];
        for a in 0..2 {
            for b in 0..2 {
                j.h[base + a][base + b] = src.h[a][b];
            }
        }
        j
    }

    /// Applies a univariate function with first and second derivatives `d1`, `d2` at `self.v`.
    #[inline]
    pub fn chain(self, f: f64, d1: f64, d2: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.g[i] = d1 * self.g[i];
        }
        for i in 0..N {
            for k in 0..N {
                out.h[i][k] = d1 * self.h[i][k] + d2 * self.g[i] * self.g[k];
            }
        }
        out
    }

    /// Applies a bivariate function `f(a, b)` given its partials at `(a.v, b.v)`.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    pub fn chain2(a: Self, b: Self, f: f64, fa: f64, fb: f64, faa: f64, fab: f64, fbb: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.g[i] = fa * a.g[i] + fb * b.g[i];
        }
        for i in 0..N {
            for k in 0..N {
                out.h[i][k] = fa * a.h[i][k]
                    + fb * b.h[i][k]
                    + faa * a.g[i] * a.g[k]
                    + fab * (a.g[i] * b.g[k] + b.g[i] * a.g[k])
                    + fbb * b.g[i] * b.g[k];
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.v += rhs.v;
        for i in 0..N {
            self.g[i] += rhs.g[i];
            for k in 0..N {
                self.h[i][k] += rhs.h[i][k];
            }
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.v -= rhs.v;
        for i in 0..N {
            self.g[i] -= rhs.g[i];
            for k in 0..N {
                self.h[i][k] -= rhs.h[i][k];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.v * rhs.v);
        for i in 0..N {
            out.g[i] = self.v * rhs.g[i] + rhs.v * self.g[i];
        }
        for i in 0..N {
            for k in 0..N {
                out.h[i][k] = self.v * rhs.h[i][k]
                    + rhs.v * self.h[i][k]
                    + self.g[i] * rhs.g[k]
                    + rhs.g[i] * self.g[k];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.v += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.v -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        self.v *= rhs;
        for i in 0..N {
            self.g[i] *= rhs;
            for k in 0..N {
                self.h[i][k] *= rhs;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<const N: usize> Real for Jet<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }
    fn atan2(self, x: Self) -> Self {
        let (s, c) = (self.v, x.v);
        let r2 = s * s + c * c;
        let r4 = r2 * r2;
        Self::chain2(
            self,
            x,
            s.atan2(c),
            c / r2,
            -s / r2,
            -2.0 * s * c / r4,
            (s * s - c * c) / r4,
            2.0 * s * c / r4,
        )
    }
}

pub type V3<T> = [T; 3];

pub fn sub3<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add3<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale3<T: Real>(a: &V3<T>, s: T) -> V3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3<T: Real>(a: &V3<T>, b: &V3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3<T: Real>(a: &V3<T>) -> T {
    dot3(a, a).sqrt()
}

pub fn value3<T: Real>(a: &V3<T>) -> [f64; 3] {
    [a[0].value(), a[1].value(), a[2].value()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) - f(&xm)) / (2.0 * h)
            })
            .collect()
    }

    fn check<F>(f: F, x: [f64; 2])
    where
        F: Fn(Jet<2>, Jet<2>) -> Jet<2>,
        F: Copy,
    {
        let j = f(Jet::variable(x[0], 0), Jet::variable(x[1], 1));
        let scalar = |p: &[f64]| f(Jet::constant(p[0]), Jet::constant(p[1])).v;
        let g = fd_grad(scalar, &x, 1e-6);
        for i in 0..2 {
            assert_relative_eq!(j.g[i], g[i], epsilon = 1e-7, max_relative = 1e-6);
        }
        for i in 0..2 {
            let gi = |p: &[f64]| f(Jet::variable(p[0], 0), Jet::variable(p[1], 1)).g[i];
            let hrow = fd_grad(gi, &x, 1e-5);
            for k in 0..2 {
                assert_relative_eq!(j.h[i][k], hrow[k], epsilon = 1e-6, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn arithmetic_matches_finite_differences() {
        check(|a, b| a * b * b - a / b, [0.7, 1.3]);
        check(|a, b| (a * a + b * b).sqrt(), [0.4, -0.9]);
        check(|a, b| a.atan2(b), [0.4, -0.9]);
        check(|a, b| a.atan2(b), [-1.2, 0.3]);
        check(|a, b| (a * 3.0).sin() * b.cos() + 2.0, [0.2, 0.5]);
    }

    #[test]
    fn lift_places_block() {
        let mut src = Jet::<2>::variable(1.5, 0);
        src.h[0][1] = 2.0;
        src.h[1][0] = 2.0;
        let j = Jet::<6>::lift(&src, 2);
        assert_eq!(j.v, 1.5);
        assert_eq!(j.g[4], 1.0);
        assert_eq!(j.h[4][5], 2.0);
        assert_eq!(j.g[0], 0.0);
    }
}
