//! Fourier representation of periodic fields and the linear operators acting on them.

pub mod field;
pub mod grid;
pub mod mollifier;
pub mod ops;
pub mod state;

pub use field::{SpectralField, VectorField};
pub use grid::{Axis, Grid};
pub use mollifier::{bump_kernel, bump_transform, mollifier_symbol};
pub use ops::{
    advect, advect_vector, differentiate, gradient, gradient_sup, lambda_s, laplacian, leray_project, mollify,
    mollify_vector, norm, Components, NormKind,
};
pub use state::MHDState;
