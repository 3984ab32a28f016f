//! Config-driven experiment runner.
//!
//! A run expands the `(eta, n, d)` grid in declared order, evaluates every
//! point with seed `master / point_index`, and writes `results.csv`,
//! `summary.json` and, for certify runs, `certificates.csv`. The CSV holds
//! no timing or host data, so the same config and seed reproduce it byte
//! for byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::eval::{BoundKind, RiskReport};
use crate::exec::configured_threads;

pub mod build;
pub mod config;
mod experiments;

pub use config::{ExperimentConfig, GridPoint, Kind};

/// Fixed column order of `results.csv`.
pub const RESULTS_HEADER: [&str; 13] = [
    "experiment",
    "kind",
    "n",
    "eta",
    "d",
    "metric",
    "estimate",
    "stderr",
    "ci_lo",
    "ci_hi",
    "bound",
    "verdict",
    "seed",
];

pub const CERTIFICATES_HEADER: [&str; 12] = [
    "experiment",
    "n",
    "eta",
    "x",
    "prediction",
    "agree",
    "disagree",
    "cert_exact",
    "cert_paper",
    "oracle_edits",
    "oracle_saturated",
    "violation",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// A reported quantity with no bound attached.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub kind: String,
    pub n: Option<usize>,
    pub eta: Option<f64>,
    pub d: Option<usize>,
    pub metric: String,
    pub estimate: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateRow {
    pub experiment: String,
    pub n: usize,
    pub eta: f64,
    pub x: String,
    pub prediction: u8,
    pub agree: usize,
    pub disagree: usize,
    pub cert_exact: f64,
    pub cert_paper: f64,
    pub oracle_edits: Option<usize>,
    pub oracle_saturated: Option<bool>,
    pub violation: bool,
}

/// Row context shared by all metrics of one grid point.
#[derive(Clone, Debug)]
pub(crate) struct RowContext {
    pub experiment: String,
    pub kind: Kind,
    pub n: Option<usize>,
    pub eta: Option<f64>,
    pub d: Option<usize>,
    pub seed: u64,
}

impl RowContext {
    pub fn row(
        &self,
        metric: &str,
        estimate: f64,
        stderr: f64,
        ci: (f64, f64),
        bound: Option<f64>,
        verdict: Verdict,
    ) -> ResultRow {
        ResultRow {
            experiment: self.experiment.clone(),
            kind: self.kind.name().to_string(),
            n: self.n,
            eta: self.eta,
            d: self.d,
            metric: metric.to_string(),
            estimate,
            stderr,
            ci_lo: ci.0,
            ci_hi: ci.1,
            bound,
            verdict,
            seed: self.seed,
        }
    }

    pub fn report(&self, r: &RiskReport) -> ResultRow {
        let (bound, verdict) = match r.bound_checked {
            Some(b) => (Some(b.bound), if b.pass { Verdict::Pass } else { Verdict::Fail }),
            None => (None, Verdict::Info),
        };
        self.row(&r.metric, r.estimate, r.std_error, r.ci95, bound, verdict)
    }

    /// A count that must be zero.
    pub fn zero_check(&self, metric: &str, violations: usize, total: usize) -> ResultRow {
        let v = if total == 0 {
            0.0
        } else {
            violations as f64 / total as f64
        };
        let verdict = if violations == 0 { Verdict::Pass } else { Verdict::Fail };
        self.row(metric, v, 0.0, (v, v), Some(0.0), verdict)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub metric: String,
    pub n: Option<usize>,
    pub eta: Option<f64>,
    pub d: Option<usize>,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub direction: BoundKind,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub schema: String,
    pub experiment: String,
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub grid_points: usize,
    pub rows: usize,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    pub notes: Vec<String>,
    pub execution: String,
    pub threads: Option<usize>,
    pub wall_time_secs: f64,
}

pub const SUMMARY_SCHEMA: &str = "poison-bounds/summary/v1";

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub certificates: Vec<CertificateRow>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn all_pass(&self) -> bool {
        self.summary.all_pass
    }
}

/// Runs every grid point without writing anything.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = experiments::Collected::default();
    experiments::run_all(cfg, &mut out)?;
    let checks: Vec<Check> = out
        .rows
        .iter()
        .filter(|r| r.verdict != Verdict::Info)
        .map(|r| Check {
            metric: r.metric.clone(),
            n: r.n,
            eta: r.eta,
            d: r.d,
            estimate: r.estimate,
            stderr: r.stderr,
            bound: r.bound.unwrap_or(f64::NAN),
            direction: out.direction(&r.metric),
            pass: r.verdict == Verdict::Pass,
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.pass);
    let summary = Summary {
        schema: SUMMARY_SCHEMA.into(),
        experiment: cfg.experiment.name.clone(),
        kind: cfg.experiment.kind.name().into(),
        seed: cfg.experiment.seed,
        config: serde_json::to_value(cfg)?,
        grid_points: cfg.points().len(),
        rows: out.rows.len(),
        checks,
        all_pass,
        notes: out.notes,
        execution: format!("{:?}", cfg.experiment.execution).to_lowercase(),
        threads: configured_threads(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        rows: out.rows,
        certificates: out.certificates,
        summary,
    })
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::Config(format!("csv: {other:?}")),
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub certificates: Option<PathBuf>,
}

pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    write_csv(&results, &RESULTS_HEADER, &out.rows)?;
    let summary = dir.join("summary.json");
    std::fs::write(&summary, serde_json::to_string_pretty(&out.summary)? + "\n")?;
    let certificates = if out.summary.kind == Kind::Certify.name() {
        let p = dir.join("certificates.csv");
        write_csv(&p, &CERTIFICATES_HEADER, &out.certificates)?;
        Some(p)
    } else {
        None
    };
    Ok(OutputPaths {
        results,
        summary,
        certificates,
    })
}

/// Runs and writes into `dir` (or the configured output directory).
pub fn run_to_dir(cfg: &ExperimentConfig, dir: Option<&Path>) -> Result<(RunOutput, OutputPaths)> {
    let out = run(cfg)?;
    let paths = write_outputs(&out, dir.unwrap_or(&cfg.output.dir))?;
    Ok((out, paths))
}
