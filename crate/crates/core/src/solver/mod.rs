//! Time integration of the perturbation system and its mollified approximation.
//!
//! The state is advanced in Elsässer variables `z± = u ± b`. Their linear
//! parts `Δz± ± ∂1 z±` are diagonal in Fourier space with symbols
//! `-|ξ|² ± iξ1`, so an integrating factor treats them exactly and only the
//! quadratic terms go through the Runge-Kutta stages.

mod integrator;
mod run;
mod study;

pub use integrator::{Checkpoint, Integrator};
pub use run::{run, run_from, Aborted, RunSettings, Trajectory};
pub use study::{fitted_order, regularization_study, time_step_study, RegularizationStudy, TimeStepStudy};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{advect_vector, leray_project, MHDState, SpectralField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    IfRk2,
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// The perturbation system as is; the magnetic equation is not projected.
    Exact,
    /// Every term wrapped in `ℙ J_ε`, products taken of mollified fields.
    Regularized { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    /// Apply the 2/3 mask to the initial state and to every product.
    pub dealias: bool,
    /// Test hook: `false` drops the quadratic terms.
    pub nonlinear: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::IfRk2,
            mode: Mode::Exact,
            dealias: true,
            nonlinear: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        if let Mode::Regularized { eps } = self.mode {
            if !(eps > 0.0) {
                return Err(Error::InvalidArgument(format!("regularization scale {eps} must be positive")));
            }
        }
        self.steps().map(|_| ())
    }

    /// Number of steps to reach `t_end`; `t_end` must be a multiple of `dt`.
    pub fn steps(&self) -> Result<u64> {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as u64)
    }
}

/// Largest admissible step for a state with the given `‖u‖∞ + ‖b‖∞`.
pub fn cfl_limit(spacing: f64, speed: f64) -> f64 {
    0.5 * spacing / (speed + 1.0).max(1.0)
}

/// Time derivatives `(∂t u, ∂t b)` of the perturbation system at `state`.
pub fn rhs<T: Real>(state: &MHDState<T>) -> Result<(VectorField<T>, VectorField<T>)> {
    let opts = SolverOptions {
        mode: Mode::Exact,
        ..SolverOptions::default()
    };
    Integrator::new(state, &opts)?.time_derivative()
}

/// Time derivatives of the mollified approximate system.
pub fn regularized_rhs<T: Real>(state: &MHDState<T>, eps: f64) -> Result<(VectorField<T>, VectorField<T>)> {
    let opts = SolverOptions {
        mode: Mode::Regularized { eps },
        ..SolverOptions::default()
    };
    Integrator::new(state, &opts)?.time_derivative()
}

/// Advances `state` by one step of `options.dt`.
pub fn step<T: Real>(state: &MHDState<T>, options: &SolverOptions) -> Result<MHDState<T>> {
    let mut it = Integrator::new(state, options)?;
    it.step()?;
    Ok(it.state())
}

/// Zero-mean pressure solving `-Δp = div(u·∇u - b·∇b)`.
pub fn pressure_recover<T: Real>(state: &MHDState<T>) -> SpectralField<T> {
    let g = state.grid().clone();
    let uu = advect_vector(&state.u, &state.u);
    let bb = advect_vector(&state.b, &state.b);
    let f = &uu - &bb;
    let n = g.n();
    let coeffs = (0..g.len())
        .map(|idx| {
            let (x1, x2) = (g.xi_odd(idx / n), g.xi_odd(idx % n));
            let q = x1 * x1 + x2 * x2;
            if q == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            let d = f.c1.coeffs()[idx] * x1 + f.c2.coeffs()[idx] * x2;
            Complex::new(-d.im, d.re) / q
        })
        .collect();
    SpectralField::from_coeffs(&g, coeffs, true).expect("sized by construction")
}

/// `ℙ` applied to both fields; used to clean up stage states.
pub fn project_state<T: Real>(state: &MHDState<T>) -> MHDState<T> {
    MHDState {
        u: leray_project(&state.u),
        b: leray_project(&state.b),
        time: state.time,
    }
}
