use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mhd2d_core::config::{parse_config, SimConfig};
use mhd2d_core::io::{self, Check};
use mhd2d_core::Error;
use serde_json::json;

/// Pseudospectral 2-D MHD runs, decay diagnostics and inequality checks.
#[derive(Parser, Debug)]
#[command(name = "mhd2d", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the random IC and the inequality corpus.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Only print the final status line.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the configured IC and write diagnostics.
    Run {
        /// Continue from a checkpoint file.
        #[arg(long, value_name = "PATH")]
        restart: Option<PathBuf>,
    },
    /// Re-analyse a diagnostics CSV.
    Diag {
        /// CSV written by `run`; defaults to `<out>/diagnostics.csv`.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Run the inequality suites.
    Ineq,
    /// Generate the configured IC and report its norms.
    Ic,
    /// Regularization-scale and time-step refinement studies.
    Convergence,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run { .. } => "run",
            Command::Diag { .. } => "diag",
            Command::Ineq => "ineq",
            Command::Ic => "ic",
            Command::Convergence => "convergence",
        }
    }
}

fn load_config(common: &Common) -> Result<SimConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => SimConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn limit_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("MHD2D_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("MHD2D_THREADS = {v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("  {mark} {}: {:.6e} (bound {:.6e})", c.name, c.value, c.bound);
    }
}

fn dispatch(cli: &Cli, cfg: &SimConfig) -> Result<Vec<Check>, Error> {
    let out = cfg.output.dir.as_path();
    let quiet = cli.common.quiet;
    let mut progress = |m: &str| {
        if !quiet {
            eprintln!("{m}");
        }
    };
    let checks = match &cli.command {
        Command::Run { restart } => {
            let o = io::run_config(cfg, out, restart.as_deref(), &mut progress)?;
            if !quiet {
                let a = &o.analysis;
                println!("steps {}  t = {}", o.steps, o.final_time);
                println!("max relative energy residual {:.3e}", a.max_energy_residual);
                println!("H^s growth {:.4}", a.hs.ratio);
                if let Some(d) = a.decay {
                    println!("kappa_hat {:.4} on [{}, {}]{}", d.kappa_hat, d.window.0, d.window.1, if d.saturated { " (saturated)" } else { "" });
                }
                if let Some(e) = a.envelope {
                    println!("envelope misfit {:.4}", e.rms_log_misfit);
                }
            }
            o.checks
        }
        Command::Diag { csv } => {
            let csv = csv.clone().unwrap_or_else(|| out.join("diagnostics.csv"));
            let (a, checks) = io::diag_csv(cfg, &csv, out)?;
            if !quiet {
                println!("{} records on [{}, {}]", a.records, a.t_start, a.t_end);
                if let Some(d) = a.decay {
                    println!("kappa_hat {:.6}", d.kappa_hat);
                }
                if let Some(e) = a.envelope {
                    println!("envelope misfit {:.4}", e.rms_log_misfit);
                }
            }
            checks
        }
        Command::Ineq => {
            let o = io::ineq_config(cfg, out, &mut progress)?;
            if !quiet {
                for s in &o.stability {
                    println!("{:32} growth {}->{}: {:.4}", s.name, s.coarse_n, s.fine_n, s.growth);
                }
            }
            o.checks
        }
        Command::Ic => {
            let o = io::ic_config(cfg, out)?;
            if !quiet {
                let r = o.report;
                println!("L2 {:.6e}  rms {:.6e}  H^{} {:.6e}  H^-{} {:.6e}", r.l2, r.rms, r.s, r.hs, r.eps, r.hdot_neg);
            }
            Vec::new()
        }
        Command::Convergence => {
            let o = io::convergence_config(cfg, out, &mut progress)?;
            if !quiet {
                println!("regularization order {:.3}  errors {:?}", o.regularization.order, o.regularization.errors);
                println!("time-step order {:.3}  errors {:?}", o.time_step.order, o.time_step.errors);
            }
            o.checks
        }
    };
    if !quiet {
        print_checks(&checks);
    }
    Ok(checks)
}

fn write_failure(out: &Path, body: &serde_json::Value) {
    let text = serde_json::to_string_pretty(body).expect("json value");
    println!("{text}");
    if std::fs::create_dir_all(out).is_ok() {
        let _ = std::fs::write(out.join("failure.json"), text + "\n");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    let fallback_out = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match limit_threads().and_then(|_| load_config(&cli.common)) {
        Ok(c) => c,
        Err(e) => {
            let errors: Vec<String> = match &e {
                Error::Config(c) => c.0.clone(),
                other => vec![other.to_string()],
            };
            write_failure(
                &fallback_out,
                &json!({ "schema_version": io::REPORT_SCHEMA_VERSION, "command": command, "status": "error", "errors": errors }),
            );
            return ExitCode::from(2);
        }
    };
    let out = cfg.output.dir.clone();
    match dispatch(&cli, &cfg) {
        Ok(checks) if checks.iter().all(|c| c.passed) => {
            if cli.common.quiet {
                println!("{command}: ok");
            }
            ExitCode::SUCCESS
        }
        Ok(checks) => {
            let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
            write_failure(
                &out,
                &json!({
                    "schema_version": io::REPORT_SCHEMA_VERSION,
                    "command": command,
                    "status": "assertions_failed",
                    "config_hash": cfg.hash(),
                    "seed": cfg.seed(),
                    "failed": failed,
                }),
            );
            ExitCode::from(1)
        }
        Err(e) => {
            write_failure(
                &out,
                &json!({
                    "schema_version": io::REPORT_SCHEMA_VERSION,
                    "command": command,
                    "status": "error",
                    "config_hash": cfg.hash(),
                    "seed": cfg.seed(),
                    "errors": [e.to_string()],
                }),
            );
            ExitCode::from(2)
        }
    }
}
