//! Exact series solutions for acoustic scattering by layered elastic spherical shells.
//!
//! The crate solves the frequency-domain problem mode by mode, sums the
//! Legendre series for pressure, displacement and stress anywhere in space,
//! and builds far-field patterns, target strength sweeps and transient
//! responses on top of that. Every solution can be checked against the
//! governing equations with [`verify::residuals`].
//!
//! ```no_run
//! use sphscat::{presets, farfield};
//!
//! let preset = presets::by_name("s1", None).unwrap();
//! let omega = 2.0 * std::f64::consts::PI * 1000.0;
//! let p0 = farfield::farfield_pattern(&preset.model, &preset.incident, omega, &[(std::f64::consts::PI, 0.0)], f64::EPSILON)
//!     .unwrap();
//! println!("TS = {:.2} dB", farfield::target_strength(p0[0].value, preset.incident.amplitude));
//! ```

pub mod cli;
pub mod error;
pub mod farfield;
pub mod fieldeval;
pub mod incident;
pub mod io;
pub mod linalg;
pub mod media;
pub mod modal;
pub mod presets;
pub mod quadrature;
pub mod specfun;
pub mod timesynth;
pub mod verify;

pub use error::{Error, Result};
pub use incident::{IncidentField, IncidentKind, Wavelet};
pub use media::{BoundaryCondition, FluidMaterial, Layer, ScattererModel, SolidLayer, SolidMaterial};
