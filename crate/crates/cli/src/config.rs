//! Run configuration: a versioned TOML document, overridable from the command line.

use crate::error::{CliError, Result};
use miura_core::energy::Weights;
use miura_core::pattern::{column_width, DEFAULT_FILL, DEFAULT_SKEW_RATIO};
use miura_core::solver::SolverConfig;
use miura_core::surface::{Rect, SurfaceKind};
use miura_core::ExecMode;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "MIURA_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub pattern: PatternConfig,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_epsilon() -> f64 {
    0.05
}

/// Surface family plus optional shape parameters; unset parameters take the family defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    /// Parameter domain `[[x0, x1], [y0, y1]]`.
    #[serde(default = "default_domain")]
    pub domain: [[f64; 2]; 2],
}

fn default_domain() -> [[f64; 2]; 2] {
    [[-1.0, 1.0], [-1.0, 1.0]]
}

fn default_kind() -> String {
    "saddle".into()
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            k: None,
            amplitude: None,
            frequency: None,
            radius: None,
            angle_scale: None,
            base_radius: None,
            radial_slope: None,
            twist: None,
            pitch: None,
            domain: default_domain(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatternConfig {
    /// Quad rows and columns `(m, n)`. Takes precedence over `quads`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    /// Target quad count; mapped to `(m, n)` by [`dims_for_quads`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quads: Option<usize>,
    /// Row skew as a fraction of the column width.
    pub skew_ratio: f64,
    /// Fraction of each domain extent covered by the pattern.
    pub fill: f64,
    /// Explicit pattern bounding box; overrides `fill`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub footprint: Option<[[f64; 2]; 2]>,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            dims: None,
            quads: Some(288),
            skew_ratio: DEFAULT_SKEW_RATIO,
            fill: DEFAULT_FILL,
            footprint: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub length: f64,
    pub mu: f64,
    pub center: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        let w = Weights::default();
        Self {
            length: w.length,
            mu: w.mu,
            center: w.center,
        }
    }
}

impl From<WeightsConfig> for Weights {
    fn from(w: WeightsConfig) -> Self {
        Weights {
            length: w.length,
            mu: w.mu,
            center: w.center,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iters: usize,
    pub tol_feas: f64,
    pub tol_stat: f64,
    pub tau0: f64,
    pub tau_growth: f64,
    pub max_shifts: usize,
    /// `false` is the undamped Newton loop.
    pub damping: bool,
    pub merit_decrease: f64,
    pub max_backtracks: usize,
    pub lm_trigger: f64,
    pub continuation: bool,
    pub blend_step: f64,
    pub min_blend_step: f64,
    /// Parallel assembly; forced off in reproducible mode.
    pub parallel: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::default();
        Self {
            max_iters: c.max_iters,
            tol_feas: c.tol_feas,
            tol_stat: c.tol_stat,
            tau0: c.tau0,
            tau_growth: c.tau_growth,
            max_shifts: c.max_shifts,
            damping: c.damping,
            merit_decrease: c.merit_decrease,
            max_backtracks: c.max_backtracks,
            lm_trigger: c.lm_trigger,
            continuation: c.continuation,
            blend_step: c.blend_step,
            min_blend_step: c.min_blend_step,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Sequential assembly, no timestamps or timings in artifacts.
    pub reproducible: bool,
    /// Quad the development starts from.
    pub seed_quad: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            reproducible: false,
            seed_quad: 0,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            surface: SurfaceConfig::default(),
            pattern: PatternConfig::default(),
            epsilon: default_epsilon(),
            weights: WeightsConfig::default(),
            solver: SolverSection::default(),
            output: OutputConfig::default(),
        }
    }
}

/// `(m, n)` with `m n = quads`, choosing the divisor `n` closest to `sqrt(quads / 2)`.
///
/// Counts of the form `2 s^2` therefore map to `(2s, s)`.
pub fn dims_for_quads(quads: usize) -> Result<(usize, usize)> {
    let target = (quads as f64 / 2.0).sqrt();
    let best = (2..=quads / 2)
        .filter(|n| quads.is_multiple_of(*n) && quads / n >= 2)
        .min_by(|a, b| (*a as f64 - target).abs().total_cmp(&(*b as f64 - target).abs()));
    match best {
        Some(n) => Ok((quads / n, n)),
        None => Err(CliError::Config(format!("{quads} quads cannot be arranged in a grid of at least 2x2"))),
    }
}

fn rect(r: [[f64; 2]; 2]) -> Rect {
    Rect::new(r[0], r[1])
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.surface_kind()?;
        self.dims()?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        let w = self.weights;
        if ![w.length, w.mu, w.center].iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return Err(CliError::Config("weights must be finite and >= 0".into()));
        }
        if !(self.pattern.fill > 0.0 && self.pattern.fill <= 1.0) {
            return Err(CliError::Config("pattern.fill must lie in (0, 1]".into()));
        }
        if !self.domain().is_valid() || !self.footprint().is_valid() {
            return Err(CliError::Config("domain and footprint must be non-empty rectangles".into()));
        }
        self.solver_config().validate().map_err(|_| CliError::Config("invalid [solver] settings".into()))?;
        Ok(())
    }

    pub fn surface_kind(&self) -> Result<SurfaceKind> {
        let s = &self.surface;
        let base = SurfaceKind::from_name(&s.kind)
            .ok_or_else(|| CliError::Config(format!("unknown surface kind {:?}", s.kind)))?;
        let given = [
            ("k", s.k),
            ("amplitude", s.amplitude),
            ("frequency", s.frequency),
            ("radius", s.radius),
            ("angle_scale", s.angle_scale),
            ("base_radius", s.base_radius),
            ("radial_slope", s.radial_slope),
            ("twist", s.twist),
            ("pitch", s.pitch),
        ];
        let allowed: &[&str] = match base {
            SurfaceKind::Flat => &[],
            SurfaceKind::Saddle { .. } | SurfaceKind::Bowl { .. } => &["k"],
            SurfaceKind::Wave { .. } => &["amplitude", "frequency"],
            SurfaceKind::Tunnel { .. } => &["radius", "angle_scale"],
            SurfaceKind::Helicoid { .. } => &["base_radius", "radial_slope", "twist", "pitch"],
        };
        if let Some((name, _)) = given.iter().find(|(n, v)| v.is_some() && !allowed.contains(n)) {
            return Err(CliError::Config(format!("parameter {name} does not apply to surface {}", s.kind)));
        }
        if let Some((name, _)) = given.iter().find(|(_, v)| v.is_some_and(|x| !x.is_finite())) {
            return Err(CliError::Config(format!("parameter {name} must be finite")));
        }
        Ok(match base {
            SurfaceKind::Flat => SurfaceKind::Flat,
            SurfaceKind::Saddle { k } => SurfaceKind::Saddle { k: s.k.unwrap_or(k) },
            SurfaceKind::Bowl { k } => SurfaceKind::Bowl { k: s.k.unwrap_or(k) },
            SurfaceKind::Wave { amplitude, frequency } => SurfaceKind::Wave {
                amplitude: s.amplitude.unwrap_or(amplitude),
                frequency: s.frequency.unwrap_or(frequency),
            },
            SurfaceKind::Tunnel { radius, angle_scale } => SurfaceKind::Tunnel {
                radius: s.radius.unwrap_or(radius),
                angle_scale: s.angle_scale.unwrap_or(angle_scale),
            },
            SurfaceKind::Helicoid {
                base_radius,
                radial_slope,
                twist,
                pitch,
            } => SurfaceKind::Helicoid {
                base_radius: s.base_radius.unwrap_or(base_radius),
                radial_slope: s.radial_slope.unwrap_or(radial_slope),
                twist: s.twist.unwrap_or(twist),
                pitch: s.pitch.unwrap_or(pitch),
            },
        })
    }

    pub fn dims(&self) -> Result<(usize, usize)> {
        match (self.pattern.dims, self.pattern.quads) {
            (Some([m, n]), _) if m >= 2 && n >= 2 => Ok((m, n)),
            (Some([m, n]), _) => Err(CliError::Config(format!("pattern dims must be at least 2x2, got {m}x{n}"))),
            (None, Some(q)) => dims_for_quads(q),
            (None, None) => Err(CliError::Config("pattern needs dims or quads".into())),
        }
    }

    pub fn domain(&self) -> Rect {
        rect(self.surface.domain)
    }

    pub fn footprint(&self) -> Rect {
        match self.pattern.footprint {
            Some(f) => rect(f),
            None => self.domain().scaled(self.pattern.fill),
        }
    }

    /// Absolute skew `delta` for the configured column count.
    pub fn skew(&self) -> Result<f64> {
        let (_, n) = self.dims()?;
        let r = self.pattern.skew_ratio;
        Ok(r * column_width(n, &self.footprint(), r))
    }

    pub fn exec_mode(&self) -> ExecMode {
        if self.solver.parallel && !self.output.reproducible {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            max_iters: s.max_iters,
            tol_feas: s.tol_feas,
            tol_stat: s.tol_stat,
            tau0: s.tau0,
            tau_growth: s.tau_growth,
            max_shifts: s.max_shifts,
            damping: s.damping,
            merit_decrease: s.merit_decrease,
            max_backtracks: s.max_backtracks,
            lm_trigger: s.lm_trigger,
            continuation: s.continuation,
            blend_step: s.blend_step,
            min_blend_step: s.min_blend_step,
            mode: self.exec_mode(),
            ..SolverConfig::default()
        }
    }

    /// Output directory after applying the environment override.
    pub fn resolve_output_dir(&mut self) {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                self.output.dir = PathBuf::from(dir);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_counts_map_to_tall_grids() {
        assert_eq!(dims_for_quads(288).unwrap(), (24, 12));
        assert_eq!(dims_for_quads(3200).unwrap(), (80, 40));
        assert_eq!(dims_for_quads(12).unwrap(), (6, 2));
        assert!(dims_for_quads(7).is_err());
    }

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        assert!(RunConfig::from_toml("schema_version = 1\nbogus = 3\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 2\n[surface]\nkind = \"saddle\"\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 1\n[surface]\nkind = \"saddle\"\nradius = 1.0\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 1\n[surface]\nkind = \"torus\"\n").is_err());
    }

    #[test]
    fn partial_documents_take_defaults() {
        let c = RunConfig::from_toml("schema_version = 1\nepsilon = 0.02\n[surface]\nkind = \"bowl\"\nk = 0.3\n").unwrap();
        assert_eq!(c.surface_kind().unwrap(), SurfaceKind::Bowl { k: 0.3 });
        assert_eq!(c.dims().unwrap(), (24, 12));
        assert_eq!(c.epsilon, 0.02);
    }
}
