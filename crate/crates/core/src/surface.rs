//! Parametric target surfaces, their normal fields and the offset band around them.

use crate::error::{Error, Result};
use crate::jet::{add3, cross3, dot3, norm3, scale3, Jet, Real, V3};
use std::f64::consts::PI;

/// Axis-aligned rectangle in the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Self { x, y }
    }

    pub fn unit_square() -> Self {
        Self::new([-1.0, 1.0], [-1.0, 1.0])
    }

    pub fn width(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn height(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1])]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x[0] && p[0] <= self.x[1] && p[1] >= self.y[0] && p[1] <= self.y[1]
    }

    /// Rectangle with the same center and extents multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let c = self.center();
        let (hw, hh) = (0.5 * s * self.width(), 0.5 * s * self.height());
        Self::new([c[0] - hw, c[0] + hw], [c[1] - hh, c[1] + hh])
    }

    pub fn is_valid(&self) -> bool {
        self.width() > 0.0 && self.height() > 0.0 && self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

/// Closed-form surface families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceKind {
    /// `(x, y, 0)`.
    Flat,
    /// `(x, y, k (x^2 - y^2))`.
    Saddle { k: f64 },
    /// `(x, y, k (x^2 + y^2))`.
    Bowl { k: f64 },
    /// `(x, y, A sin(w x))`.
    Wave { amplitude: f64, frequency: f64 },
    /// `(x, r sin(a y), r cos(a y))`, a cylinder around the x axis.
    Tunnel { radius: f64, angle_scale: f64 },
    /// `(rho cos t, rho sin t, c t)` with `rho = r0 + s x` and `t = w y`.
    Helicoid {
        base_radius: f64,
        radial_slope: f64,
        twist: f64,
        pitch: f64,
    },
}

impl SurfaceKind {
    pub fn saddle() -> Self {
        Self::Saddle { k: 0.5 }
    }
    pub fn bowl() -> Self {
        Self::Bowl { k: 0.5 }
    }
    pub fn wave() -> Self {
        Self::Wave {
            amplitude: 0.3,
            frequency: PI,
        }
    }
    pub fn tunnel() -> Self {
        Self::Tunnel {
            radius: 1.0,
            angle_scale: PI / 3.0,
        }
    }
    pub fn helicoid() -> Self {
        Self::Helicoid {
            base_radius: 1.0,
            radial_slope: 0.4,
            twist: PI / 2.0,
            pitch: 0.3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Saddle { .. } => "saddle",
            Self::Bowl { .. } => "bowl",
            Self::Wave { .. } => "wave",
            Self::Tunnel { .. } => "tunnel",
            Self::Helicoid { .. } => "helicoid",
        }
    }

    /// Default-parameter family by name.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "flat" => Self::Flat,
            "saddle" => Self::saddle(),
            "bowl" => Self::bowl(),
            "wave" => Self::wave(),
            "tunnel" => Self::tunnel(),
            "helicoid" => Self::helicoid(),
            _ => return None,
        })
    }

    /// The five curved families used in the experiments.
    pub fn curved_families() -> [Self; 5] {
        [Self::saddle(), Self::tunnel(), Self::bowl(), Self::helicoid(), Self::wave()]
    }
}

/// Value and derivatives of a map `R -> R^3` at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub position: [f64; 3],
    /// `[d/dx, d/dy]`.
    pub d1: [[f64; 3]; 2],
    /// `[d2/dxdx, d2/dxdy, d2/dydy]`.
    pub d2: [[f64; 3]; 3],
}

impl SurfacePoint {
    fn from_jet(p: &V3<Jet<2>>) -> Self {
        let mut out = SurfacePoint {
            position: [0.0; 3],
            d1: [[0.0; 3]; 2],
            d2: [[0.0; 3]; 3],
        };
        for c in 0..3 {
            out.position[c] = p[c].v;
            out.d1[0][c] = p[c].g[0];
            out.d1[1][c] = p[c].g[1];
            out.d2[0][c] = p[c].h[0][0];
            out.d2[1][c] = p[c].h[0][1];
            out.d2[2][c] = p[c].h[1][1];
        }
        out
    }
}

/// Unit normal and its two parameter partials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalFrame {
    pub n: [f64; 3],
    pub dn: [[f64; 3]; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceChart {
    pub domain: Rect,
    pub kind: SurfaceKind,
    /// Homotopy parameter `t`: the chart is `t phi + (1 - t) (x, y, 0)`; 1 is the target.
    pub blend: f64,
}

impl SurfaceChart {
    pub fn new(kind: SurfaceKind, domain: Rect) -> Self {
        Self {
            domain,
            kind,
            blend: 1.0,
        }
    }

    /// The same chart pulled toward the plane `z = 0` by the homotopy parameter `t`.
    pub fn with_blend(self, t: f64) -> Self {
        Self { blend: t, ..self }
    }

    pub fn position_generic<T: Real>(&self, x: T, y: T) -> V3<T> {
        let p = self.target_position(x, y);
        if self.blend == 1.0 {
            return p;
        }
        let t = self.blend;
        [p[0] * t + x * (1.0 - t), p[1] * t + y * (1.0 - t), p[2] * t]
    }

    /// Hand-derived `(phi_x, phi_y)`.
    pub fn tangents_generic<T: Real>(&self, x: T, y: T) -> (V3<T>, V3<T>) {
        let (px, py) = self.target_tangents(x, y);
        if self.blend == 1.0 {
            return (px, py);
        }
        let t = self.blend;
        (
            [px[0] * t + (1.0 - t), px[1] * t, px[2] * t],
            [py[0] * t, py[1] * t + (1.0 - t), py[2] * t],
        )
    }

    fn check_domain(&self, p: [f64; 2]) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x: p[0], y: p[1] })
        }
    }

    fn target_position<T: Real>(&self, x: T, y: T) -> V3<T> {
        match self.kind {
            SurfaceKind::Flat => [x, y, T::cst(0.0)],
            SurfaceKind::Saddle { k } => [x, y, (x * x - y * y) * k],
            SurfaceKind::Bowl { k } => [x, y, (x * x + y * y) * k],
            SurfaceKind::Wave {
                amplitude,
                frequency,
            } => [x, y, (x * frequency).sin() * amplitude],
            SurfaceKind::Tunnel {
                radius,
                angle_scale,
            } => {
                let t = y * angle_scale;
                [x, t.sin() * radius, t.cos() * radius]
            }
            SurfaceKind::Helicoid {
                base_radius,
                radial_slope,
                twist,
                pitch,
            } => {
                let rho = x * radial_slope + base_radius;
                let t = y * twist;
                [rho * t.cos(), rho * t.sin(), t * pitch]
            }
        }
    }

    fn target_tangents<T: Real>(&self, x: T, y: T) -> (V3<T>, V3<T>) {
        let zero = T::cst(0.0);
        let one = T::cst(1.0);
        match self.kind {
            SurfaceKind::Flat => ([one, zero, zero], [zero, one, zero]),
            SurfaceKind::Saddle { k } => ([one, zero, x * (2.0 * k)], [zero, one, y * (-2.0 * k)]),
            SurfaceKind::Bowl { k } => ([one, zero, x * (2.0 * k)], [zero, one, y * (2.0 * k)]),
            SurfaceKind::Wave {
                amplitude,
                frequency,
            } => (
                [one, zero, (x * frequency).cos() * (amplitude * frequency)],
                [zero, one, zero],
            ),
            SurfaceKind::Tunnel {
                radius,
                angle_scale,
            } => {
                let t = y * angle_scale;
                let ra = radius * angle_scale;
                ([one, zero, zero], [zero, t.cos() * ra, -(t.sin() * ra)])
            }
            SurfaceKind::Helicoid {
                base_radius,
                radial_slope,
                twist,
                pitch,
            } => {
                let rho = x * radial_slope + base_radius;
                let t = y * twist;
                let (s, c) = (t.sin(), t.cos());
                (
                    [c * radial_slope, s * radial_slope, zero],
                    [-(rho * s) * twist, rho * c * twist, T::cst(pitch * twist)],
                )
            }
        }
    }

    /// `(phi_x x phi_y) / |phi_x x phi_y|`.
    pub fn normal_generic<T: Real>(&self, x: T, y: T) -> Result<V3<T>> {
        let (tx, ty) = self.tangents_generic(x, y);
        let c = cross3(&tx, &ty);
        let len = norm3(&c);
        if len.value() < 1e-12 {
            return Err(Error::SingularChart {
                x: x.value(),
                y: y.value(),
            });
        }
        let inv = T::cst(1.0) / len;
        Ok(scale3(&c, inv))
    }

    pub fn evaluate(&self, p: [f64; 2]) -> Result<SurfacePoint> {
        self.check_domain(p)?;
        let pos = self.position_generic(Jet::<2>::variable(p[0], 0), Jet::variable(p[1], 1));
        Ok(SurfacePoint::from_jet(&pos))
    }

    pub fn normal(&self, p: [f64; 2]) -> Result<NormalFrame> {
        self.check_domain(p)?;
        let n = self.normal_generic(Jet::<2>::variable(p[0], 0), Jet::variable(p[1], 1))?;
        let mut out = NormalFrame {
            n: [0.0; 3],
            dn: [[0.0; 3]; 2],
        };
        for c in 0..3 {
            out.n[c] = n[c].v;
            out.dn[0][c] = n[c].g[0];
            out.dn[1][c] = n[c].g[1];
        }
        Ok(out)
    }

    /// Principal curvatures `(k1, k2)` with `k1 >= k2`, relative to the chart normal.
    pub fn principal_curvatures(&self, p: [f64; 2]) -> Result<(f64, f64)> {
        let sp = self.evaluate(p)?;
        let n = self.normal(p)?.n;
        let [tx, ty] = sp.d1;
        let (e, f, g) = (dot3(&tx, &tx), dot3(&tx, &ty), dot3(&ty, &ty));
        let (l, m, nn) = (dot3(&sp.d2[0], &n), dot3(&sp.d2[1], &n), dot3(&sp.d2[2], &n));
        let det = e * g - f * f;
        let gauss = (l * nn - m * m) / det;
        let mean = (e * nn - 2.0 * f * m + g * l) / (2.0 * det);
        let disc = (mean * mean - gauss).max(0.0).sqrt();
        Ok((mean + disc, mean - disc))
    }

    /// Smallest focal distance `1 / max |k|` over a `samples x samples` grid of the domain.
    pub fn min_focal_distance(&self, samples: usize) -> Result<f64> {
        let mut kmax: f64 = 0.0;
        for p in grid_points(&self.domain, samples) {
            let sp = self.evaluate(p)?;
            if norm3(&cross3(&sp.d1[0], &sp.d1[1])) < 1e-12 {
                return Err(Error::SingularChart { x: p[0], y: p[1] });
            }
            let (k1, k2) = self.principal_curvatures(p)?;
            kmax = kmax.max(k1.abs()).max(k2.abs());
        }
        Ok(if kmax > 0.0 { 1.0 / kmax } else { f64::INFINITY })
    }
}

fn grid_points(r: &Rect, samples: usize) -> impl Iterator<Item = [f64; 2]> + '_ {
    let s = samples.max(2);
    (0..s).flat_map(move |i| {
        (0..s).map(move |j| {
            let tx = i as f64 / (s - 1) as f64;
            let ty = j as f64 / (s - 1) as f64;
            [r.x[0] + tx * r.width(), r.y[0] + ty * r.height()]
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// The upper and lower offset surfaces `phi +/- epsilon n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffsetPair {
    pub chart: SurfaceChart,
    pub epsilon: f64,
}

/// Grid resolution used to bound the focal distance when building an [`OffsetPair`].
pub const FOCAL_SAMPLES: usize = 50;

impl OffsetPair {
    /// Builds the band, rejecting offsets that reach the sampled focal distance.
    pub fn new(chart: SurfaceChart, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::OffsetTooLarge {
                epsilon,
                focal: f64::NAN,
            });
        }
        let focal = chart.min_focal_distance(FOCAL_SAMPLES)?;
        if epsilon >= focal {
            return Err(Error::OffsetTooLarge { epsilon, focal });
        }
        Ok(Self { chart, epsilon })
    }

    pub fn domain(&self) -> &Rect {
        &self.chart.domain
    }

    /// Offset map as a jet in the two parameter coordinates.
    pub fn offset_jet(&self, side: Side, p: [f64; 2]) -> Result<V3<Jet<2>>> {
        self.chart.check_domain(p)?;
        let (x, y) = (Jet::<2>::variable(p[0], 0), Jet::variable(p[1], 1));
        let pos = self.chart.position_generic(x, y);
        if self.epsilon == 0.0 {
            return Ok(pos);
        }
        let n = self.chart.normal_generic(x, y)?;
        Ok(add3(&pos, &scale3(&n, Jet::constant(side.sign() * self.epsilon))))
    }

    pub fn offset_evaluate(&self, side: Side, p: [f64; 2]) -> Result<SurfacePoint> {
        Ok(SurfacePoint::from_jet(&self.offset_jet(side, p)?))
    }
}
