//! Settings for the five-surface feasibility study.
//!
//! All surfaces use |Q| = 288 and epsilon = 0.05. The helicoid uses a stronger
//! centering weight: with the default one its optimum drifts across the domain
//! boundary in the radial direction.

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const STUDY_SURFACES: [&str; 5] = ["saddle", "tunnel", "bowl", "helicoid", "wave"];
pub const STUDY_QUADS: usize = 288;
pub const STUDY_EPSILON: f64 = 0.05;
pub const HELICOID_CENTER_WEIGHT: f64 = 0.05;

pub fn study(surface: &str) -> Result<RunConfig> {
    if !STUDY_SURFACES.contains(&surface) {
        return Err(CliError::Config(format!(
            "no preset for surface {surface:?}; choose one of {}",
            STUDY_SURFACES.join(", ")
        )));
    }
    let mut cfg = RunConfig::default();
    cfg.surface.kind = surface.into();
    cfg.pattern.dims = None;
    cfg.pattern.quads = Some(STUDY_QUADS);
    cfg.epsilon = STUDY_EPSILON;
    if surface == "helicoid" {
        cfg.weights.center = HELICOID_CENTER_WEIGHT;
    }
    cfg.validate()?;
    Ok(cfg)
}
