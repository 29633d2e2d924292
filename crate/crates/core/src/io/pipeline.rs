//! Config-driven pipelines: each reads a [`SimConfig`], writes its artifacts
//! into an output directory and evaluates the configured assertions.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_checkpoint, load_series, save_checkpoint, save_series, write_report, SeriesMeta, Snapshot};
use crate::config::{Assertions, DiagConfig, Format, SimConfig, Suite};
use crate::diagnostics::{
    duhamel_lowfreq_bound, fit_decay_exponent, fit_envelope, hs_monitor, DecayFit, DiagnosticsRecord, EnvelopeFit,
    HsMonitor,
};
use crate::error::{Error, Result};
use crate::ic::{amplitude_calibrate, make_ic, report, IcReport};
use crate::ineq::{check_calculus, check_gn, check_log_sobolev, resolution_growth, CorpusSpec, InequalityReport};
use crate::solver::{
    regularization_study, run_from, time_step_study, Integrator, RegularizationStudy, RunSettings, TimeStepStudy,
};
use crate::spectral::MHDState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value >= bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelSummary {
    pub constant: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub excluded_saturated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub records: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// `max |E + 2∫D - E0| / E0` over the records.
    pub max_energy_residual: f64,
    pub hs: HsMonitor,
    /// Fit of `‖(u,b)‖_{L²}` over the fit window.
    pub decay: Option<DecayFit>,
    /// Shell energy against `(1+t)^{-2κ}` over the fit window, nonempty shells only.
    pub envelope: Option<EnvelopeFit>,
    pub duhamel: DuhamelSummary,
}

/// Post-hoc analysis of a record series.
pub fn analyze(records: &[DiagnosticsRecord], diag: &DiagConfig) -> Result<Analysis> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::DegenerateWindow { got: 0, need: 1 }),
    };
    let e0 = first.energy();
    let max_energy_residual = records
        .iter()
        .map(|r| if e0 > 0.0 { r.energy_residual.abs() / e0 } else { r.energy_residual.abs() })
        .fold(0.0, f64::max);
    let kappa = diag.eps.min(0.5);
    let (decay, envelope) = match diag.fit_window {
        None => (None, None),
        Some((a, b)) => {
            let l2: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.l2())).collect();
            let decay = fit_decay_exponent(&l2, (a, b))?;
            let shell: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.time >= a && r.time <= b && r.low_freq_modes > 0 && r.low_freq_energy > 0.0)
                .map(|r| (r.time, r.low_freq_energy))
                .collect();
            let envelope = fit_envelope(&shell, |t| (1.0 + t).powf(-2.0 * kappa))?;
            (Some(decay), Some(envelope))
        }
    };
    let d = duhamel_lowfreq_bound(records, diag.eps);
    Ok(Analysis {
        records: records.len(),
        t_start: first.time,
        t_end: last.time,
        max_energy_residual,
        hs: hs_monitor(records),
        decay,
        envelope,
        duhamel: DuhamelSummary {
            constant: d.constant,
            max_ratio: d.max_ratio,
            samples: d.samples.len(),
            excluded_saturated: d.excluded_saturated,
        },
    })
}

fn run_checks(a: &Assertions, analysis: &Analysis, records: &[DiagnosticsRecord]) -> Vec<Check> {
    let mut out = Vec::new();
    if !records.iter().all(DiagnosticsRecord::is_valid) {
        out.push(Check::at_most("records_finite", f64::NAN, 0.0));
    }
    if let Some(b) = a.energy_residual {
        out.push(Check::at_most("energy_residual", analysis.max_energy_residual, b));
    }
    if let Some(b) = a.hs_growth {
        let mut c = Check::at_most("hs_growth", analysis.hs.ratio, b);
        c.passed = c.value < b;
        out.push(c);
    }
    if let (Some(k), Some(tol)) = (a.kappa, a.kappa_tol) {
        let value = analysis.decay.map_or(f64::NAN, |d| d.kappa_hat);
        out.push(Check {
            name: format!("kappa_hat within {tol} of {k}"),
            value,
            bound: tol,
            passed: (value - k).abs() <= tol,
        });
    }
    if let Some(b) = a.envelope_misfit {
        let value = analysis.envelope.map_or(f64::NAN, |e| e.rms_log_misfit);
        out.push(Check::at_most("envelope_misfit", value, b));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub steps: u64,
    pub final_time: f64,
    pub analysis: Analysis,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub snapshots: Vec<(String, f64)>,
}

fn initial_state(cfg: &SimConfig) -> Result<MHDState<f64>> {
    let s = make_ic::<f64>(&cfg.ic_spec())?;
    match cfg.hs_target {
        Some(h) => amplitude_calibrate(&s, h, cfg.diagnostics.s),
        None => Ok(s),
    }
}

/// Runs the configured simulation, optionally from a checkpoint. Writes
/// `config.txt`, `diagnostics.csv`, `state_NNNN.snap`, `checkpoint.bin` and
/// `summary.json` as the output formats ask. On abort the records so far and
/// the last good state are still written.
pub fn run_config(
    cfg: &SimConfig,
    out: &Path,
    restart: Option<&Path>,
    progress: &mut dyn FnMut(&str),
) -> Result<RunOutcome> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.txt"), cfg.to_text())?;
    let hash = cfg.hash();
    let it = match restart {
        Some(p) => {
            let (cp, written_by) = load_checkpoint::<f64>(p)?;
            let g = cp.zplus.grid();
            if g.n() != cfg.grid.n || g.length() != cfg.grid.length {
                return Err(Error::InvalidArgument(format!(
                    "checkpoint grid ({}, {}) differs from the config's ({}, {})",
                    g.n(),
                    g.length(),
                    cfg.grid.n,
                    cfg.grid.length
                )));
            }
            progress(&format!(
                "resuming from step {} (checkpoint written under config {written_by})",
                cp.step_index
            ));
            Integrator::resume(&cp, &cfg.solver)?
        }
        None => Integrator::new(&initial_state(cfg)?, &cfg.solver)?,
    };
    let settings = RunSettings {
        diagnostics: cfg.diagnostics.settings(),
        record_every: cfg.diagnostics.every,
        state_every: cfg.diagnostics.state_every,
    };
    let total = cfg.solver.steps()?;
    let tick = (total / 10).max(1);
    let cp_every = cfg.output.checkpoint_every;
    let cp_path = out.join("checkpoint.bin");
    let meta = SeriesMeta {
        config_hash: hash.clone(),
        seed: cfg.seed(),
    };
    let result = run_from(it, &settings, |it| {
        let k = it.step_index();
        if k % tick == 0 || k == total {
            progress(&format!("step {k}/{total}  t = {:.4}", it.time()));
        }
        if cp_every > 0 && (k % cp_every == 0 || k == total) {
            save_checkpoint(&cp_path, &it.checkpoint(), &hash)?;
        }
        Ok(())
    });
    let traj = match result {
        Ok(t) => t,
        Err(aborted) => {
            save_series(&out.join("diagnostics.csv"), &meta, &aborted.partial.records)?;
            Snapshot::from_state(&aborted.last_state).save(&out.join("state_last.snap"))?;
            return Err(aborted.error);
        }
    };
    if cfg.output.wants(Format::Csv) {
        save_series(&out.join("diagnostics.csv"), &meta, &traj.records)?;
    }
    let mut snapshots = Vec::new();
    if cfg.output.wants(Format::Snapshot) {
        for (i, s) in traj.states.iter().enumerate() {
            let name = format!("state_{i:04}.snap");
            Snapshot::from_state(s).save(&out.join(&name))?;
            snapshots.push((name, s.time));
        }
    }
    let analysis = analyze(&traj.records, &cfg.diagnostics)?;
    let checks = run_checks(&cfg.assert, &analysis, &traj.records);
    let outcome = RunOutcome {
        steps: total,
        final_time: traj.records.last().map_or(0.0, |r| r.time),
        passed: checks.iter().all(|c| c.passed),
        analysis,
        checks,
        snapshots,
    };
    if cfg.output.wants(Format::Json) {
        write_report(&out.join("summary.json"), "run", &hash, cfg.seed(), &outcome)?;
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagOutcome {
    pub source: PathBuf,
    pub source_config_hash: String,
    pub analysis: Analysis,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Re-analyses a diagnostics CSV with the config's fit window and assertions.
pub fn diag_csv(cfg: &SimConfig, csv: &Path, out: &Path) -> Result<(Analysis, Vec<Check>)> {
    std::fs::create_dir_all(out)?;
    let (meta, records) = load_series(csv)?;
    let analysis = analyze(&records, &cfg.diagnostics)?;
    let checks = run_checks(&cfg.assert, &analysis, &records);
    let outcome = DiagOutcome {
        source: csv.to_path_buf(),
        source_config_hash: meta.config_hash,
        passed: checks.iter().all(|c| c.passed),
        analysis: analysis.clone(),
        checks: checks.clone(),
    };
    write_report(&out.join("diag.json"), "diag", &cfg.hash(), meta.seed, &outcome)?;
    Ok((analysis, checks))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub name: String,
    pub coarse_n: usize,
    pub fine_n: usize,
    pub growth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqOutcome {
    pub reports: Vec<InequalityReport>,
    pub stability: Vec<Stability>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Every configured suite at every configured resolution; writes `ineq.json`.
pub fn ineq_config(cfg: &SimConfig, out: &Path, progress: &mut dyn FnMut(&str)) -> Result<IneqOutcome> {
    std::fs::create_dir_all(out)?;
    let i = &cfg.ineq;
    let corpus = CorpusSpec {
        samples: i.samples,
        seed: i.seed,
        kmax: i.kmax,
        length: cfg.grid.length,
        ..CorpusSpec::default()
    };
    let mut per_res: Vec<Vec<InequalityReport>> = Vec::new();
    for &n in &i.resolutions {
        let mut v = Vec::new();
        for suite in &i.suites {
            match suite {
                Suite::Calculus => v.extend(check_calculus::<f64>(&corpus, n, i.s)?),
                Suite::LogSobolev => v.push(check_log_sobolev::<f64>(&corpus, n, i.p)?),
                Suite::Gn => v.push(check_gn::<f64>(&corpus, n, i.q)?),
            }
        }
        for r in &v {
            progress(&format!("n = {n:4}  {:32} max_ratio {:.6e}", r.name, r.max_ratio));
        }
        per_res.push(v);
    }
    let mut stability = Vec::new();
    for w in per_res.windows(2) {
        for (c, f) in w[0].iter().zip(&w[1]) {
            stability.push(Stability {
                name: c.name.clone(),
                coarse_n: c.n,
                fine_n: f.n,
                growth: resolution_growth(c, f),
            });
        }
    }
    let reports: Vec<InequalityReport> = per_res.into_iter().flatten().collect();
    let mut checks = Vec::new();
    for r in &reports {
        let mut c = Check::at_most(&format!("{}@{} finite", r.name, r.n), r.max_ratio, f64::MAX);
        c.passed = r.max_ratio.is_finite();
        checks.push(c);
    }
    if let Some(b) = cfg.assert.resolution_growth {
        for s in &stability {
            let mut c = Check::at_most(&format!("{} growth {}->{}", s.name, s.coarse_n, s.fine_n), s.growth, b);
            c.passed = s.growth <= b && s.growth >= 1.0 / b;
            checks.push(c);
        }
    }
    if let Some(b) = cfg.assert.unit_ratio {
        for r in &reports {
            checks.push(Check::at_most(
                &format!("{}@{} |max_ratio - 1|", r.name, r.n),
                (r.max_ratio - 1.0).abs(),
                b,
            ));
        }
    }
    let outcome = IneqOutcome {
        passed: checks.iter().all(|c| c.passed),
        reports,
        stability,
        checks,
    };
    write_report(&out.join("ineq.json"), "ineq", &cfg.hash(), Some(i.seed), &outcome)?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOutcome {
    pub regularization: RegularizationStudy,
    pub time_step: TimeStepStudy,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Regularization-scale and time-step refinement from the configured IC;
/// writes `convergence.json`.
pub fn convergence_config(cfg: &SimConfig, out: &Path, progress: &mut dyn FnMut(&str)) -> Result<ConvergenceOutcome> {
    std::fs::create_dir_all(out)?;
    let s = initial_state(cfg)?;
    progress("regularization study");
    let regularization = regularization_study(&s, &cfg.solver, &cfg.convergence.eps_reg)?;
    progress("time-step study");
    let time_step = time_step_study(&s, &cfg.solver, cfg.convergence.dt_levels)?;
    let mut checks = Vec::new();
    if let Some(b) = cfg.assert.reg_order {
        checks.push(Check::at_least("regularization_order", regularization.order, b));
    }
    if let (Some(p), Some(tol)) = (cfg.assert.dt_order, cfg.assert.dt_order_tol) {
        checks.push(Check {
            name: format!("time-step order within {tol} of {p}"),
            value: time_step.order,
            bound: tol,
            passed: (time_step.order - p).abs() <= tol,
        });
    }
    let outcome = ConvergenceOutcome {
        passed: checks.iter().all(|c| c.passed),
        regularization,
        time_step,
        checks,
    };
    write_report(&out.join("convergence.json"), "convergence", &cfg.hash(), cfg.seed(), &outcome)?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcOutcome {
    pub report: IcReport,
    pub snapshot: String,
}

/// Generates the configured IC, writes `ic.snap` and `ic.json`.
pub fn ic_config(cfg: &SimConfig, out: &Path) -> Result<IcOutcome> {
    std::fs::create_dir_all(out)?;
    let s = initial_state(cfg)?;
    let r = report(&s, cfg.diagnostics.s, cfg.diagnostics.eps)?;
    Snapshot::from_state(&s).save(&out.join("ic.snap"))?;
    let outcome = IcOutcome {
        report: r,
        snapshot: "ic.snap".into(),
    };
    write_report(&out.join("ic.json"), "ic", &cfg.hash(), cfg.seed(), &outcome)?;
    Ok(outcome)
}
