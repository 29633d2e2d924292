//! Pseudospectral simulation of 2-D incompressible MHD perturbed around a
//! uniform unit magnetic field along `x1`, with diagnostics for energy
//! balance, low-frequency decay and functional inequalities.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which every documented tolerance assumes.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod ic;
pub mod ineq;
pub mod io;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = spectral::Grid<f64>;
pub type Field64 = spectral::SpectralField<f64>;
pub type Vector64 = spectral::VectorField<f64>;
pub type State64 = spectral::MHDState<f64>;

pub type Grid32 = spectral::Grid<f32>;
pub type Field32 = spectral::SpectralField<f32>;
pub type Vector32 = spectral::VectorField<f32>;
pub type State32 = spectral::MHDState<f32>;
