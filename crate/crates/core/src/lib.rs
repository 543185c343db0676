//! Inverse design of surface-aligned Miura-ori.
//!
//! A parallelogram quad pattern is laid out in the parameter domain of a target
//! surface, its vertices are lifted alternately onto the upper and lower offset
//! surfaces, and the planar configuration is optimized so that the folded pattern has
//! planar quads and zero angle defect at every interior vertex. The result can be
//! developed back into a flat crease pattern.
//!
//! Module map:
//! - [`surface`]: target charts, normals, offset band
//! - [`pattern`]: initial tessellation and folding
//! - [`qc`]: discrete Beltrami coefficients and the conformality energy
//! - [`energy`]: edge-length, conformality and centering objective
//! - [`constraint`]: planarity and developability residuals
//! - [`solver`]: Newton iteration on the KKT system
//! - [`unfold`]: development and crease classification

pub mod assembly;
pub mod constraint;
pub mod energy;
pub mod error;
pub mod fdcheck;
pub mod jet;
pub mod par;
pub mod pattern;
pub mod qc;
pub mod solver;
pub mod surface;
pub mod unfold;

pub use error::{Error, Result};
pub use par::ExecMode;
