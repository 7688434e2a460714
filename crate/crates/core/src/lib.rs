//! Single-photon scattering in a rectangular waveguide coupled to a V-type
//! three-level emitter.
//!
//! The emitter sits at the centre of the cross section with its dipole along
//! the guide axis, so it couples only to TM modes with odd transverse indices.
//! Everything works in the single-excitation sector: the emitter self-energy
//! is evaluated in closed form ([`selfenergy`]), the per-channel reflection
//! and transmission follow from the Lippmann-Schwinger amplitudes
//! ([`scattering`]), and the perfect-transmission / perfect-reflection
//! conditions are solved in [`conditions`].
//!
//! Units: angular frequencies in PHz, lengths in µm, `c = 0.29979 µm·PHz`.
//!
//! ```
//! use wgscatter::{EmitterParams, InputState, SelfEnergyOptions, WaveguideGeometry};
//!
//! let geom = WaveguideGeometry::from_aspect(1.5, 1.2).unwrap();
//! let em = EmitterParams::new(1.3, 1.1, 0.1, 0.1).unwrap();
//! let input = InputState::single_mode(&geom, 1.2, 1).unwrap();
//! let res = wgscatter::scatter(&em, &geom, &input, &SelfEnergyOptions::default()).unwrap();
//! assert!((res.total_reflectance + res.total_transmittance - 1.0).abs() < 1e-12);
//! ```

pub mod conditions;
pub mod emitter;
mod error;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod scattering;
pub mod selfenergy;
pub mod spectrum;

pub use num_complex::Complex64;

pub use conditions::{ConditionReport, Regime, ScanOptions, Window};
pub use emitter::{EmitterParams, Transition, Variant};
pub use error::{Error, Result};
pub use geometry::{Region, TmMode, WaveguideGeometry, C_LIGHT};
pub use scattering::{scatter, InputKind, InputState, ScatteringResult};
pub use selfenergy::{ResolventValue, SelfEnergy, SelfEnergyOptions};
