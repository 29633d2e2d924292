//! Refinement studies in the time step and the regularization scale.

use serde::{Deserialize, Serialize};

use super::{Integrator, Mode, SolverOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{MHDState, NormKind};

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("order fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("order fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

fn l2_distance<T: Real>(a: &MHDState<T>, b: &MHDState<T>) -> Result<f64> {
    let du = &a.u - &b.u;
    let db = &a.b - &b.b;
    Ok(crate::spectral::norm(&(&du, &db), NormKind::L2)?.to_f64_lossy())
}

fn integrate<T: Real>(initial: &MHDState<T>, opts: &SolverOptions) -> Result<Integrator<T>> {
    let mut it = Integrator::new(initial, opts)?;
    let steps = opts.steps()?;
    while it.step_index() < steps {
        it.step()?;
    }
    Ok(it)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationStudy {
    pub t_end: f64,
    pub eps: Vec<f64>,
    /// `‖(u^ε,b^ε) - (u,b)‖_{L²}` at `t_end`.
    pub errors: Vec<f64>,
    pub order: f64,
}

/// Runs the exact system and the regularized one at each `eps` with the same
/// step and scheme, and compares the final states.
pub fn regularization_study<T: Real>(
    initial: &MHDState<T>,
    opts: &SolverOptions,
    eps: &[f64],
) -> Result<RegularizationStudy> {
    let exact = integrate(
        initial,
        &SolverOptions {
            mode: Mode::Exact,
            ..*opts
        },
    )?
    .state();
    let mut errors = Vec::with_capacity(eps.len());
    for &e in eps {
        let reg = integrate(
            initial,
            &SolverOptions {
                mode: Mode::Regularized { eps: e },
                ..*opts
            },
        )?
        .state();
        errors.push(l2_distance(&reg, &exact)?);
    }
    Ok(RegularizationStudy {
        t_end: opts.t_end,
        eps: eps.to_vec(),
        order: fitted_order(eps, &errors)?,
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStepStudy {
    pub t_end: f64,
    pub dt: Vec<f64>,
    /// `‖z(dt) - z(dt/2)‖_{L²}` for each level but the finest.
    pub errors: Vec<f64>,
    pub order: f64,
    /// `|E + 2∫D - E0| / E0` at `t_end`, per level.
    pub energy_residuals: Vec<f64>,
    /// Order of the energy residual, if every level has a nonzero residual.
    pub residual_order: Option<f64>,
}

/// Halves `opts.dt` `levels - 1` times; orders come from successive differences.
pub fn time_step_study<T: Real>(initial: &MHDState<T>, opts: &SolverOptions, levels: u32) -> Result<TimeStepStudy> {
    if levels < 2 {
        return Err(Error::InvalidArgument("time-step study needs at least two levels".into()));
    }
    let mut dts = Vec::new();
    let mut states = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..levels {
        let dt = opts.dt / f64::powi(2.0, k as i32);
        let it = integrate(initial, &SolverOptions { dt, ..*opts })?;
        let state = it.state();
        let e0 = it.initial_energy();
        let r = (state.energy().to_f64_lossy() + 2.0 * it.cumulative_dissipation() - e0).abs() / e0;
        dts.push(dt);
        states.push(state);
        residuals.push(r);
    }
    let errors = states
        .windows(2)
        .map(|w| l2_distance(&w[0], &w[1]))
        .collect::<Result<Vec<f64>>>()?;
    let coarse = &dts[..dts.len() - 1];
    let residual_order = fitted_order(&dts, &residuals).ok();
    Ok(TimeStepStudy {
        t_end: opts.t_end,
        order: fitted_order(coarse, &errors)?,
        dt: dts,
        errors,
        energy_residuals: residuals,
        residual_order,
    })
}
