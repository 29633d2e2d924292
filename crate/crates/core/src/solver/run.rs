use std::fmt;

use super::{Integrator, SolverOptions};
use crate::diagnostics::{record, DiagnosticsRecord, DiagnosticsSettings};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::MHDState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub diagnostics: DiagnosticsSettings,
    /// Steps between diagnostics records.
    pub record_every: u64,
    /// Steps between kept states; 0 keeps only the first and last.
    pub state_every: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            diagnostics: DiagnosticsSettings::default(),
            record_every: 1,
            state_every: 0,
        }
    }
}

/// Records every `record_every` steps (and at the final step), plus the
/// states selected by `state_every`.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub records: Vec<DiagnosticsRecord>,
    pub states: Vec<MHDState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> Option<&MHDState<T>> {
        self.states.last()
    }

    /// `(t, ‖(u,b)‖_{L²})` series.
    pub fn l2_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.time, r.l2())).collect()
    }
}

/// A run that stopped early: the error, what was recorded so far and the last
/// good state.
pub struct Aborted<T: Real> {
    pub error: Error,
    pub partial: Trajectory<T>,
    pub last_state: MHDState<T>,
}

impl<T: Real> fmt::Debug for Aborted<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Aborted")
            .field("error", &self.error)
            .field("records", &self.partial.records.len())
            .field("time", &self.last_state.time)
            .finish()
    }
}

impl<T: Real> fmt::Display for Aborted<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted at t = {} after {} records: {}",
            self.last_state.time,
            self.partial.records.len(),
            self.error
        )
    }
}

impl<T: Real> std::error::Error for Aborted<T> {}

pub fn run<T: Real>(
    initial: &MHDState<T>,
    opts: &SolverOptions,
    settings: &RunSettings,
) -> std::result::Result<Trajectory<T>, Aborted<T>> {
    let it = Integrator::new(initial, opts).map_err(|error| Aborted {
        error,
        partial: Trajectory {
            records: Vec::new(),
            states: Vec::new(),
        },
        last_state: initial.clone(),
    })?;
    run_from(it, settings, |_| Ok(()))
}

/// Continues `it` to `t_end`. `observer` sees the integrator after every step
/// (checkpointing hooks in here); its errors abort the run.
pub fn run_from<T: Real>(
    mut it: Integrator<T>,
    settings: &RunSettings,
    mut observer: impl FnMut(&Integrator<T>) -> Result<()>,
) -> std::result::Result<Trajectory<T>, Aborted<T>> {
    let mut traj = Trajectory {
        records: Vec::new(),
        states: Vec::new(),
    };
    let total = match it.options().steps() {
        Ok(n) => n,
        Err(error) => {
            let last_state = it.state();
            return Err(Aborted {
                error,
                partial: traj,
                last_state,
            });
        }
    };
    let record_every = settings.record_every.max(1);
    let sample = |it: &Integrator<T>, traj: &mut Trajectory<T>, keep: bool| -> Result<()> {
        let state = it.state();
        traj.records.push(record(
            &state,
            &settings.diagnostics,
            it.cumulative_dissipation(),
            it.initial_energy(),
        )?);
        if keep {
            traj.states.push(state);
        }
        Ok(())
    };
    let abort = |error: Error, it: &Integrator<T>, traj: Trajectory<T>| Aborted {
        error,
        partial: traj,
        last_state: it.state(),
    };
    if let Err(e) = sample(&it, &mut traj, true) {
        return Err(abort(e, &it, traj));
    }
    while it.step_index() < total {
        if let Err(e) = it.step() {
            return Err(abort(e, &it, traj));
        }
        let k = it.step_index();
        let last = k == total;
        let keep = last || (settings.state_every > 0 && k % settings.state_every == 0);
        if last || k % record_every == 0 {
            if let Err(e) = sample(&it, &mut traj, keep) {
                return Err(abort(e, &it, traj));
            }
        } else if keep {
            traj.states.push(it.state());
        }
        if let Err(e) = observer(&it) {
            return Err(abort(e, &it, traj));
        }
    }
    Ok(traj)
}
