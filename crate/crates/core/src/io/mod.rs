//! Files a run reads and writes: snapshots, checkpoints, diagnostics CSV and
//! JSON reports, plus the config-driven pipelines behind the CLI.

mod pipeline;
mod snapshot;

pub use pipeline::{
    analyze, convergence_config, diag_csv, ic_config, ineq_config, run_config, Analysis, Check, ConvergenceOutcome,
    DiagOutcome, DuhamelSummary, IcOutcome, IneqOutcome, RunOutcome, Stability,
};
pub use snapshot::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Snapshot, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

/// Version stamped on every JSON report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 10] = [
    "time",
    "l2_u",
    "l2_b",
    "grad_l2_u",
    "grad_l2_b",
    "hs",
    "hdot_neg",
    "low_freq_energy",
    "g_value",
    "energy_residual",
];

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub time: f64,
    pub l2_u: f64,
    pub l2_b: f64,
    pub grad_l2_u: f64,
    pub grad_l2_b: f64,
    pub hs: f64,
    pub hdot_neg: f64,
    pub low_freq_energy: f64,
    pub g_value: f64,
    pub energy_residual: f64,
}

impl From<&DiagnosticsRecord> for SeriesRow {
    fn from(r: &DiagnosticsRecord) -> Self {
        Self {
            time: r.time,
            l2_u: r.l2_u,
            l2_b: r.l2_b,
            grad_l2_u: r.grad_l2_u,
            grad_l2_b: r.grad_l2_b,
            hs: r.hs,
            hdot_neg: r.hdot_neg,
            low_freq_energy: r.low_freq_energy,
            g_value: r.g_value,
            energy_residual: r.energy_residual,
        }
    }
}

impl SeriesRow {
    /// Fields the CSV does not carry are filled in: the shell counts as empty
    /// when its energy is zero, and the dissipation is backed out of the
    /// energy residual against the first row.
    pub fn to_record(&self, initial_energy: f64) -> DiagnosticsRecord {
        let energy = self.l2_u * self.l2_u + self.l2_b * self.l2_b;
        DiagnosticsRecord {
            time: self.time,
            l2_u: self.l2_u,
            l2_b: self.l2_b,
            grad_l2_u: self.grad_l2_u,
            grad_l2_b: self.grad_l2_b,
            hs: self.hs,
            hdot_neg: self.hdot_neg,
            low_freq_energy: self.low_freq_energy,
            low_freq_modes: usize::from(self.low_freq_energy > 0.0),
            g_value: self.g_value,
            cumulative_dissipation: 0.5 * (self.energy_residual + initial_energy - energy),
            energy_residual: self.energy_residual,
        }
    }
}

/// Provenance lines written above the CSV header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesMeta {
    pub config_hash: String,
    pub seed: Option<u64>,
}

pub fn write_series(w: &mut impl Write, meta: &SeriesMeta, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "# config_hash = {}", meta.config_hash)?;
    match meta.seed {
        Some(s) => writeln!(w, "# seed = {s}")?,
        None => writeln!(w, "# seed = none")?,
    }
    let mut csv = csv::Writer::from_writer(w);
    for r in records {
        csv.serialize(SeriesRow::from(r)).map_err(csv_error)?;
    }
    if records.is_empty() {
        csv.write_record(CSV_COLUMNS).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_series(r: &mut impl Read) -> Result<(SeriesMeta, Vec<SeriesRow>)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut meta = SeriesMeta::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').split_once('=') {
            match k.trim() {
                "config_hash" => meta.config_hash = v.trim().to_string(),
                "seed" => meta.seed = v.trim().parse().ok(),
                _ => {}
            }
        }
    }
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = csv.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::InvalidArgument(format!(
            "unexpected CSV columns {header:?}, expected {CSV_COLUMNS:?}"
        )));
    }
    let rows = csv
        .deserialize()
        .collect::<std::result::Result<Vec<SeriesRow>, _>>()
        .map_err(csv_error)?;
    Ok((meta, rows))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("CSV: {e}"))
}

pub fn save_series(path: &Path, meta: &SeriesMeta, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_series(&mut w, meta, records)?;
    w.flush()?;
    Ok(())
}

pub fn load_series(path: &Path) -> Result<(SeriesMeta, Vec<DiagnosticsRecord>)> {
    let (meta, rows) = read_series(&mut File::open(path)?)?;
    let e0 = rows.first().map_or(0.0, |r| r.l2_u * r.l2_u + r.l2_b * r.l2_b);
    Ok((meta, rows.iter().map(|r| r.to_record(e0)).collect()))
}

/// Wrapper every JSON report is written in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile<R> {
    pub schema_version: u32,
    pub kind: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub report: R,
}

pub fn write_report<R: Serialize>(path: &Path, kind: &str, config_hash: &str, seed: Option<u64>, report: &R) -> Result<()> {
    let file = ReportFile {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: kind.to_string(),
        config_hash: config_hash.to_string(),
        seed,
        report,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &file)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
