//! Run configuration in a flat `key = value` text format.
//!
//! ```text
//! schema_version = 1
//! grid.n = 256
//! grid.length = 32pi        # a trailing `pi` multiplies by π
//! ic.kind = random_spectrum
//! ic.alpha_low = -0.4
//! solver.t_end = 12
//! ```
//!
//! Blank lines and `#` comments are ignored; string values may be quoted.
//! Every key is optional except `schema_version`. [`parse_config`] reports
//! every problem it finds, each with its line number.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsSettings;
use crate::error::{Error, Result};
use crate::ic::{saturating_slope, ICSpec, IcKind};
use crate::solver::{Mode, Scheme, SolverOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagConfig {
    /// Steps between records.
    pub every: u64,
    /// Steps between snapshots; 0 writes only the first and last state.
    pub state_every: u64,
    pub s: f64,
    pub eps: f64,
    pub c1: f64,
    pub fit_window: Option<(f64, f64)>,
}

impl DiagConfig {
    pub fn settings(&self) -> DiagnosticsSettings {
        DiagnosticsSettings {
            s: self.s,
            eps: self.eps,
            c1: self.c1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Snapshot,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Snapshot => "snapshot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_every: u64,
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Calculus,
    LogSobolev,
    Gn,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Calculus => "calculus",
            Suite::LogSobolev => "log_sobolev",
            Suite::Gn => "gn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqConfig {
    pub suites: Vec<Suite>,
    pub samples: usize,
    pub seed: u64,
    pub kmax: i64,
    /// Resolutions compared for stability.
    pub resolutions: Vec<usize>,
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub eps_reg: Vec<f64>,
    /// Number of dt halvings in the time-step study.
    pub dt_levels: u32,
}

/// Checks that make the command exit nonzero when they fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Assertions {
    /// Bound on `max |E + 2∫D - E0| / E0`.
    pub energy_residual: Option<f64>,
    /// Bound on `max H^s / initial H^s`.
    pub hs_growth: Option<f64>,
    /// Expected decay exponent and its absolute tolerance.
    pub kappa: Option<f64>,
    pub kappa_tol: Option<f64>,
    /// Bound on the envelope fit's rms log misfit.
    pub envelope_misfit: Option<f64>,
    /// Bound on `max_ratio(fine) / max_ratio(coarse)` (and its inverse).
    pub resolution_growth: Option<f64>,
    /// Bound on `|max_ratio - 1|` for every inequality report.
    pub unit_ratio: Option<f64>,
    /// Minimum fitted order in the regularization study.
    pub reg_order: Option<f64>,
    /// Expected time-step order and its absolute tolerance.
    pub dt_order: Option<f64>,
    pub dt_order_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub schema_version: u32,
    pub grid: GridConfig,
    pub ic: IcKind,
    /// If set, the initial state is rescaled to this `H^s` norm.
    pub hs_target: Option<f64>,
    pub solver: SolverOptions,
    pub diagnostics: DiagConfig,
    pub output: OutputConfig,
    pub ineq: IneqConfig,
    pub convergence: ConvergenceConfig,
    pub assert: Assertions,
}

impl Default for SimConfig {
    fn default() -> Self {
        let d = DiagnosticsSettings::default();
        Self {
            schema_version: SCHEMA_VERSION,
            grid: GridConfig { n: 128, length: 2.0 * PI },
            ic: IcKind::Shear { amplitude: 1.0, mode: 1 },
            hs_target: None,
            solver: SolverOptions::default(),
            diagnostics: DiagConfig {
                every: 10,
                state_every: 0,
                s: d.s,
                eps: d.eps,
                c1: d.c1,
                fit_window: None,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                formats: vec![Format::Csv, Format::Json, Format::Snapshot],
                checkpoint_every: 0,
            },
            ineq: IneqConfig {
                suites: vec![Suite::Calculus, Suite::LogSobolev, Suite::Gn],
                samples: 120,
                seed: 0,
                kmax: 12,
                resolutions: vec![128, 256],
                s: 2.5,
                p: 4.0,
                q: 4.0,
            },
            convergence: ConvergenceConfig {
                eps_reg: vec![0.2, 0.1, 0.05],
                dt_levels: 3,
            },
            assert: Assertions::default(),
        }
    }
}

impl SimConfig {
    pub fn ic_spec(&self) -> ICSpec {
        ICSpec {
            kind: self.ic,
            n: self.grid.n,
            length: self.grid.length,
        }
    }

    /// Replaces the IC seed (random spectra) and the inequality corpus seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let IcKind::RandomSpectrum { seed: s, .. } = &mut self.ic {
            *s = seed;
        }
        self.ineq.seed = seed;
        self
    }

    /// The seed that reproduces this run's random inputs, if any.
    pub fn seed(&self) -> Option<u64> {
        self.ic.seed()
    }

    /// Canonical text: every key, fixed order, round-trip float formatting.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        put("schema_version", self.schema_version.to_string());
        put("grid.n", self.grid.n.to_string());
        put("grid.length", num(self.grid.length));
        match self.ic {
            IcKind::Shear { amplitude, mode } => {
                put("ic.kind", "shear".into());
                put("ic.amplitude", num(amplitude));
                put("ic.mode", mode.to_string());
            }
            IcKind::ElsasserAligned { amplitude } => {
                put("ic.kind", "elsasser_aligned".into());
                put("ic.amplitude", num(amplitude));
            }
            IcKind::SingleMode { k1, k2, amplitude } => {
                put("ic.kind", "single_mode".into());
                put("ic.amplitude", num(amplitude));
                put("ic.k1", k1.to_string());
                put("ic.k2", k2.to_string());
            }
            IcKind::RandomSpectrum {
                alpha_low,
                r_high,
                amplitude,
                seed,
                k_cross,
                presmooth,
            } => {
                put("ic.kind", "random_spectrum".into());
                put("ic.amplitude", num(amplitude));
                put("ic.alpha_low", num(alpha_low));
                put("ic.r_high", num(r_high));
                put("ic.seed", seed.to_string());
                put("ic.k_cross", num(k_cross));
                put("ic.presmooth", num(presmooth));
            }
        }
        if let Some(h) = self.hs_target {
            put("ic.hs_target", num(h));
        }
        let s = &self.solver;
        put("solver.dt", num(s.dt));
        put("solver.t_end", num(s.t_end));
        put(
            "solver.scheme",
            match s.scheme {
                Scheme::IfRk2 => "if_rk2",
                Scheme::IfRk4 => "if_rk4",
            }
            .into(),
        );
        match s.mode {
            Mode::Exact => put("solver.mode", "exact".into()),
            Mode::Regularized { eps } => {
                put("solver.mode", "regularized".into());
                put("solver.eps_reg", num(eps));
            }
        }
        put("solver.dealias", s.dealias.to_string());
        put("solver.nonlinear", s.nonlinear.to_string());
        let d = &self.diagnostics;
        put("diagnostics.every", d.every.to_string());
        put("diagnostics.state_every", d.state_every.to_string());
        put("diagnostics.s", num(d.s));
        put("diagnostics.eps", num(d.eps));
        put("diagnostics.c1", num(d.c1));
        if let Some((a, b)) = d.fit_window {
            put("diagnostics.fit_start", num(a));
            put("diagnostics.fit_end", num(b));
        }
        put("output.dir", quote(&self.output.dir.to_string_lossy()));
        put(
            "output.formats",
            self.output.formats.iter().map(|f| f.name()).collect::<Vec<_>>().join(","),
        );
        put("output.checkpoint_every", self.output.checkpoint_every.to_string());
        let i = &self.ineq;
        put(
            "ineq.suites",
            i.suites.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
        );
        put("ineq.samples", i.samples.to_string());
        put("ineq.seed", i.seed.to_string());
        put("ineq.kmax", i.kmax.to_string());
        put(
            "ineq.resolutions",
            i.resolutions.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        );
        put("ineq.s", num(i.s));
        put("ineq.p", num(i.p));
        put("ineq.q", num(i.q));
        put(
            "convergence.eps_reg",
            self.convergence.eps_reg.iter().map(|&e| num(e)).collect::<Vec<_>>().join(","),
        );
        put("convergence.dt_levels", self.convergence.dt_levels.to_string());
        let a = &self.assert;
        for (k, v) in [
            ("assert.energy_residual", a.energy_residual),
            ("assert.hs_growth", a.hs_growth),
            ("assert.kappa", a.kappa),
            ("assert.kappa_tol", a.kappa_tol),
            ("assert.envelope_misfit", a.envelope_misfit),
            ("assert.resolution_growth", a.resolution_growth),
            ("assert.unit_ratio", a.unit_ratio),
            ("assert.reg_order", a.reg_order),
            ("assert.dt_order", a.dt_order),
            ("assert.dt_order_tol", a.dt_order_tol),
        ] {
            if let Some(v) = v {
                put(k, num(v));
            }
        }
        o
    }

    /// First 16 hex digits of the SHA-256 of [`SimConfig::to_text`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct Raw {
    entries: BTreeMap<String, (String, usize)>,
    lines: BTreeMap<String, usize>,
    errors: Vec<String>,
}

impl Raw {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        let v = self.entries.remove(key);
        if let Some((_, line)) = &v {
            self.lines.insert(key.to_string(), *line);
        }
        v
    }

    fn err(&mut self, key: &str, msg: String) {
        match self.lines.get(key) {
            Some(l) => self.errors.push(format!("line {l}: {key}: {msg}")),
            None => self.errors.push(format!("{key}: {msg}")),
        }
    }

    fn parsed<T>(&mut self, key: &str, kind: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let (v, _) = self.take(key)?;
        let out = parse(&v);
        if out.is_none() {
            self.err(key, format!("cannot read `{v}` as {kind}"));
        }
        out
    }

    fn f64(&mut self, key: &str, default: f64) -> f64 {
        self.parsed(key, "a number", parse_f64).unwrap_or(default)
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        self.parsed(key, "a number", parse_f64)
    }

    fn int<T: std::str::FromStr>(&mut self, key: &str, default: T) -> T {
        self.parsed(key, "an integer", |v| v.parse().ok()).unwrap_or(default)
    }

    fn bool(&mut self, key: &str, default: bool) -> bool {
        self.parsed(key, "true or false", |v| v.parse().ok()).unwrap_or(default)
    }

    fn list<T>(&mut self, key: &str, kind: &str, one: impl Fn(&str) -> Option<T>, default: Vec<T>) -> Vec<T> {
        self.parsed(key, kind, |v| {
            v.split(',').map(|p| one(p.trim())).collect::<Option<Vec<T>>>()
        })
        .unwrap_or(default)
    }

    fn word(&mut self, key: &str, choices: &[&str], default: &str) -> String {
        match self.take(key) {
            None => default.to_string(),
            Some((v, _)) if choices.contains(&v.as_str()) => v,
            Some((v, _)) => {
                self.err(key, format!("`{v}` is not one of {}", choices.join(", ")));
                default.to_string()
            }
        }
    }

    fn check(&mut self, key: &str, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            let m = msg();
            self.err(key, m);
        }
    }
}

/// Number with an optional `pi` suffix (`32pi`, `0.5 pi`) or the names `pi`, `e`.
fn parse_f64(v: &str) -> Option<f64> {
    let v = v.trim();
    match v {
        "pi" => return Some(PI),
        "e" => return Some(E),
        _ => {}
    }
    if let Some(head) = v.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        return head.parse::<f64>().ok().map(|x| x * PI);
    }
    v.parse().ok()
}

fn unquote(v: &str) -> Option<String> {
    let v = v.trim();
    if let Some(inner) = v.strip_prefix('"') {
        let inner = inner.strip_suffix('"')?;
        let mut out = String::new();
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                out.push(chars.next()?);
            } else {
                out.push(c);
            }
        }
        Some(out)
    } else {
        Some(v.to_string())
    }
}

/// Parses and validates a configuration; the error lists every violation.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut raw = Raw {
        entries: BTreeMap::new(),
        lines: BTreeMap::new(),
        errors: Vec::new(),
    };
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let body = strip_comment(line).trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            raw.errors.push(format!("line {no}: expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            raw.errors.push(format!("line {no}: empty key or value"));
            continue;
        }
        let Some(v) = unquote(v) else {
            raw.errors.push(format!("line {no}: unterminated string"));
            continue;
        };
        if let Some((_, first)) = raw.entries.get(k) {
            raw.errors.push(format!("line {no}: {k} already set on line {first}"));
            continue;
        }
        raw.entries.insert(k.to_string(), (v, no));
    }

    let mut cfg = SimConfig::default();
    match raw.parsed("schema_version", "an integer", |v| v.parse::<u32>().ok()) {
        Some(SCHEMA_VERSION) => {}
        Some(v) => raw.err("schema_version", format!("unsupported version {v} (expected {SCHEMA_VERSION})")),
        None if !raw.lines.contains_key("schema_version") => {
            raw.errors.push(format!("schema_version is required (expected {SCHEMA_VERSION})"))
        }
        None => {}
    }

    cfg.grid.n = raw.int("grid.n", cfg.grid.n);
    cfg.grid.length = raw.f64("grid.length", cfg.grid.length);
    let n = cfg.grid.n;
    raw.check("grid.n", n >= 8 && n.is_power_of_two(), || {
        format!("{n} must be a power of two, at least 8")
    });
    let l = cfg.grid.length;
    raw.check("grid.length", l > 0.0 && l.is_finite(), || format!("{l} must be positive"));

    let kind = raw.word(
        "ic.kind",
        &["shear", "elsasser_aligned", "single_mode", "random_spectrum"],
        "shear",
    );
    let amplitude = raw.f64("ic.amplitude", 1.0);
    cfg.ic = match kind.as_str() {
        "shear" => IcKind::Shear {
            amplitude,
            mode: raw.int("ic.mode", 1),
        },
        "elsasser_aligned" => IcKind::ElsasserAligned { amplitude },
        "single_mode" => IcKind::SingleMode {
            k1: raw.int("ic.k1", 1),
            k2: raw.int("ic.k2", 0),
            amplitude,
        },
        _ => {
            let eps = raw
                .entries
                .get("diagnostics.eps")
                .and_then(|(v, _)| parse_f64(v))
                .unwrap_or(cfg.diagnostics.eps);
            IcKind::RandomSpectrum {
                alpha_low: raw.f64("ic.alpha_low", saturating_slope(eps)),
                r_high: raw.f64("ic.r_high", 4.0),
                amplitude,
                seed: raw.int("ic.seed", 0),
                k_cross: raw.f64("ic.k_cross", 1.0),
                presmooth: raw.f64("ic.presmooth", E),
            }
        }
    };
    if let Err(e) = cfg.ic.validate() {
        raw.err("ic.kind", format!("{kind}: {e}"));
    }
    cfg.hs_target = raw.opt_f64("ic.hs_target");
    if let Some(h) = cfg.hs_target {
        raw.check("ic.hs_target", h > 0.0 && h.is_finite(), || format!("{h} must be positive"));
    }

    let s = &mut cfg.solver;
    s.dt = raw.f64("solver.dt", s.dt);
    s.t_end = raw.f64("solver.t_end", s.t_end);
    s.scheme = match raw.word("solver.scheme", &["if_rk2", "if_rk4"], "if_rk2").as_str() {
        "if_rk4" => Scheme::IfRk4,
        _ => Scheme::IfRk2,
    };
    let mode = raw.word("solver.mode", &["exact", "regularized"], "exact");
    s.mode = if mode == "regularized" {
        Mode::Regularized {
            eps: raw.f64("solver.eps_reg", 0.1),
        }
    } else {
        Mode::Exact
    };
    s.dealias = raw.bool("solver.dealias", s.dealias);
    s.nonlinear = raw.bool("solver.nonlinear", s.nonlinear);
    if let Err(e) = cfg.solver.validate() {
        raw.err("solver", e.to_string());
    }
    if let Mode::Regularized { eps } = cfg.solver.mode {
        raw.check("solver.eps_reg", eps > 0.0 && eps < l / 4.0, || {
            format!("{eps} must lie in (0, L/4)")
        });
    }

    let d = &mut cfg.diagnostics;
    d.every = raw.int("diagnostics.every", d.every);
    d.state_every = raw.int("diagnostics.state_every", d.state_every);
    d.s = raw.f64("diagnostics.s", d.s);
    d.eps = raw.f64("diagnostics.eps", d.eps);
    d.c1 = raw.f64("diagnostics.c1", d.c1);
    let (fs, fe) = (raw.opt_f64("diagnostics.fit_start"), raw.opt_f64("diagnostics.fit_end"));
    d.fit_window = match (fs, fe) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            raw.errors.push("diagnostics.fit_start and diagnostics.fit_end must be given together".into());
            None
        }
    };
    let d = cfg.diagnostics;
    raw.check("diagnostics.every", d.every >= 1, || "must be at least 1".into());
    raw.check("diagnostics.s", d.s > 2.0 && d.s.is_finite(), || {
        format!("s = {} violates s > 2, the Sobolev order required for global well-posedness", d.s)
    });
    raw.check("diagnostics.eps", d.eps > 0.0 && d.eps < 1.0, || {
        format!(
            "eps = {} violates 0 < eps < 1, the range of negative Sobolev data the decay estimate covers",
            d.eps
        )
    });
    raw.check("diagnostics.c1", d.c1 > 0.0 && d.c1.is_finite(), || {
        format!("{} must be positive", d.c1)
    });
    if let Some((a, b)) = d.fit_window {
        raw.check("diagnostics.fit_end", 0.0 <= a && a < b && b <= cfg.solver.t_end, || {
            format!("fit window [{a}, {b}] must be nonempty and inside [0, t_end]")
        });
    }

    if let Some(dir) = raw.parsed("output.dir", "a path", |v| Some(PathBuf::from(v))) {
        cfg.output.dir = dir;
    }
    cfg.output.formats = raw.list(
        "output.formats",
        "a list of csv, json, snapshot",
        |p| match p {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "snapshot" => Some(Format::Snapshot),
            _ => None,
        },
        cfg.output.formats.clone(),
    );
    cfg.output.checkpoint_every = raw.int("output.checkpoint_every", 0);

    let i = &mut cfg.ineq;
    i.suites = raw.list(
        "ineq.suites",
        "a list of calculus, log_sobolev, gn",
        |p| match p {
            "calculus" => Some(Suite::Calculus),
            "log_sobolev" => Some(Suite::LogSobolev),
            "gn" => Some(Suite::Gn),
            _ => None,
        },
        i.suites.clone(),
    );
    i.samples = raw.int("ineq.samples", i.samples);
    i.seed = raw.int("ineq.seed", i.seed);
    i.kmax = raw.int("ineq.kmax", i.kmax);
    i.resolutions = raw.list("ineq.resolutions", "a list of integers", |p| p.parse().ok(), i.resolutions.clone());
    i.s = raw.f64("ineq.s", i.s);
    i.p = raw.f64("ineq.p", i.p);
    i.q = raw.f64("ineq.q", i.q);
    let i = cfg.ineq.clone();
    raw.check("ineq.samples", i.samples >= crate::ineq::MIN_SAMPLES, || {
        format!("{} is below the minimum corpus size {}", i.samples, crate::ineq::MIN_SAMPLES)
    });
    raw.check("ineq.resolutions", !i.resolutions.is_empty(), || "must not be empty".into());
    for &r in &i.resolutions {
        raw.check("ineq.resolutions", r.is_power_of_two() && 6 * i.kmax.max(1) as usize <= r, || {
            format!("{r} must be a power of two resolving products of kmax = {} fields", i.kmax)
        });
    }
    raw.check("ineq.kmax", i.kmax >= 1, || "must be at least 1".into());
    raw.check("ineq.s", i.s > 1.0, || format!("{} must exceed 1", i.s));
    raw.check("ineq.p", i.p > 2.0 && i.p.is_finite(), || format!("{} must satisfy 2 < p < inf", i.p));
    raw.check("ineq.q", i.q >= 2.0 && i.q.is_finite(), || format!("{} must satisfy 2 <= q < inf", i.q));

    let c = &mut cfg.convergence;
    c.eps_reg = raw.list("convergence.eps_reg", "a list of numbers", parse_f64, c.eps_reg.clone());
    c.dt_levels = raw.int("convergence.dt_levels", c.dt_levels);
    let c = cfg.convergence.clone();
    raw.check("convergence.eps_reg", c.eps_reg.len() >= 2 && c.eps_reg.iter().all(|&e| e > 0.0 && e < l / 4.0), || {
        "needs at least two scales in (0, L/4)".into()
    });
    raw.check("convergence.dt_levels", c.dt_levels >= 2, || "must be at least 2".into());

    let a = &mut cfg.assert;
    a.energy_residual = raw.opt_f64("assert.energy_residual");
    a.hs_growth = raw.opt_f64("assert.hs_growth");
    a.kappa = raw.opt_f64("assert.kappa");
    a.kappa_tol = raw.opt_f64("assert.kappa_tol");
    a.envelope_misfit = raw.opt_f64("assert.envelope_misfit");
    a.resolution_growth = raw.opt_f64("assert.resolution_growth");
    a.unit_ratio = raw.opt_f64("assert.unit_ratio");
    a.reg_order = raw.opt_f64("assert.reg_order");
    a.dt_order = raw.opt_f64("assert.dt_order");
    a.dt_order_tol = raw.opt_f64("assert.dt_order_tol");
    let a = cfg.assert;
    raw.check("assert.kappa_tol", a.kappa.is_some() == a.kappa_tol.is_some(), || {
        "assert.kappa and assert.kappa_tol must be given together".into()
    });
    raw.check("assert.dt_order_tol", a.dt_order.is_some() == a.dt_order_tol.is_some(), || {
        "assert.dt_order and assert.dt_order_tol must be given together".into()
    });

    let leftovers: Vec<(String, usize)> = raw.entries.iter().map(|(k, (_, l))| (k.clone(), *l)).collect();
    for (k, l) in leftovers {
        let why = if k.starts_with("ic.") {
            format!("line {l}: unknown key {k} for ic.kind = {kind}")
        } else if k == "solver.eps_reg" {
            format!("line {l}: solver.eps_reg only applies to solver.mode = regularized")
        } else {
            format!("line {l}: unknown key {k}")
        };
        raw.errors.push(why);
    }

    if raw.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(ConfigErrors(raw.errors)))
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(ConfigErrors(v))) => v,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults_and_round_trips() {
        let c = parse_config("schema_version = 1\n").unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn full_config() {
        let text = r#"
            schema_version = 1   # required
            grid.n = 256
            grid.length = 32pi
            ic.kind = random_spectrum
            ic.amplitude = 1e-2
            ic.alpha_low = -0.4
            ic.seed = 7
            ic.presmooth = e
            solver.dt = 0.02
            solver.t_end = 12
            solver.scheme = if_rk4
            solver.mode = regularized
            solver.eps_reg = 0.1
            solver.nonlinear = false
            diagnostics.every = 5
            diagnostics.eps = 0.3
            diagnostics.fit_start = 3
            diagnostics.fit_end = 9
            output.dir = "runs/a #1"
            output.formats = csv, json
            assert.kappa = 0.3
            assert.kappa_tol = 0.05
        "#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.grid.length, 32.0 * PI);
        assert_eq!(c.solver.scheme, Scheme::IfRk4);
        assert_eq!(c.solver.mode, Mode::Regularized { eps: 0.1 });
        assert_eq!(c.diagnostics.fit_window, Some((3.0, 9.0)));
        assert_eq!(c.output.dir, PathBuf::from("runs/a #1"));
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
        assert_eq!(c.seed(), Some(7));
        assert!(matches!(c.ic, IcKind::RandomSpectrum { presmooth, .. } if presmooth == E));
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
        assert_eq!(c.hash().len(), 16);
    }

    #[test]
    fn small_s_cites_the_hypothesis() {
        let e = errors("schema_version = 1\ndiagnostics.s = 1.5\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].starts_with("line 2:") && e[0].contains("s > 2"), "{e:?}");
    }

    #[test]
    fn every_violation_is_reported() {
        let text = "grid.n = 100\ndiagnostics.eps = 1.2\nfoo.bar = 3\nic.mode = x\nsolver.dt = 0.3\nsolver.t_end = 1\nbroken line\ngrid.n = 64\n";
        let e = errors(text);
        let has = |s: &str| e.iter().any(|m| m.contains(s));
        assert!(has("schema_version is required"));
        assert!(has("line 1: grid.n"));
        assert!(has("line 2: diagnostics.eps") && has("0 < eps < 1"));
        assert!(has("line 3: unknown key foo.bar"));
        assert!(has("line 4: ic.mode: cannot read `x`"));
        assert!(has("not a multiple of dt"));
        assert!(has("line 7: expected `key = value`"));
        assert!(has("line 8: grid.n already set on line 1"));
    }

    #[test]
    fn keys_of_other_ic_kinds_are_unknown() {
        let e = errors("schema_version = 1\nic.kind = shear\nic.seed = 3\n");
        assert_eq!(e, vec!["line 3: unknown key ic.seed for ic.kind = shear".to_string()]);
    }

    #[test]
    fn seed_override() {
        let c = parse_config("schema_version = 1\nic.kind = random_spectrum\nic.seed = 1\n").unwrap();
        let d = c.clone().with_seed(99);
        assert_eq!(d.seed(), Some(99));
        assert_ne!(c.hash(), d.hash());
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            n_pow in 3u32..11,
            len in 0.1f64..1e3,
            amp in 1e-6f64..10.0,
            alpha in -0.99f64..2.0,
            seed in any::<u64>(),
            eps in 0.001f64..0.999,
            s in 2.001f64..8.0,
            steps in 1u64..10_000,
        ) {
            let mut c = SimConfig::default();
            c.grid = GridConfig { n: 1 << n_pow, length: len };
            c.ic = IcKind::RandomSpectrum { alpha_low: alpha, r_high: 3.0, amplitude: amp, seed, k_cross: 1.0, presmooth: 0.5 };
            c.solver.dt = 1e-3;
            c.solver.t_end = steps as f64 * 1e-3;
            c.diagnostics.eps = eps;
            c.diagnostics.s = s;
            c.convergence.eps_reg = vec![len / 8.0, len / 16.0];
            if let Ok(back) = parse_config(&c.to_text()) {
                prop_assert_eq!(back, c);
            } else {
                // only the t_end/dt multiple check can reject these
                prop_assert!(c.solver.steps().is_err());
            }
        }
    }
}
