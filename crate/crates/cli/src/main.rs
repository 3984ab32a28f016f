//! `poison-bounds`: runs experiment configs and the invariant self-test.
//!
//! Set `POISON_BOUNDS_THREADS` to fix the worker count of parallel runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use poison_bounds::exec::Execution;
use poison_bounds::harness::{self, ExperimentConfig, Kind, Verdict};
use poison_bounds::selftest;

#[derive(Parser)]
#[command(name = "poison-bounds", version, about = "Targeted-poisoning bounds at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; exit 0 iff every bound check passes.
    Run {
        config: PathBuf,
        /// Output directory (default: `[output] dir` of the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config as a certify experiment and print the certificates.
    Certify {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the experiment kinds.
    ListExperiments,
    /// Run the exhaustive invariant suites.
    Selftest {
        #[arg(long)]
        sequential: bool,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(mut cfg: ExperimentConfig, out: Option<PathBuf>, print_certs: bool) -> Result<bool> {
    if print_certs {
        cfg.experiment.kind = Kind::Certify;
        cfg.validate()?;
    }
    let (res, paths) = harness::run_to_dir(&cfg, out.as_deref())?;
    if print_certs {
        println!("x\tprediction\tcert_exact\tcert_paper\toracle_edits");
        for c in &res.certificates {
            let oracle = c.oracle_edits.map_or_else(|| "-".to_string(), |k| k.to_string());
            println!(
                "{}\t{}\t{:.6}\t{:.6}\t{}",
                c.x, c.prediction, c.cert_exact, c.cert_paper, oracle
            );
        }
    }
    for r in res.rows.iter().filter(|r| r.verdict == Verdict::Fail) {
        eprintln!(
            "FAIL {} n={:?} eta={:?} d={:?}: {:.6} (se {:.6}) vs bound {:?}",
            r.metric, r.n, r.eta, r.d, r.estimate, r.stderr, r.bound
        );
    }
    for n in &res.summary.notes {
        eprintln!("note: {n}");
    }
    let checks = &res.summary.checks;
    let passed = checks.iter().filter(|c| c.pass).count();
    println!(
        "{}: {} rows, {passed}/{} checks passed -> {}",
        cfg.experiment.name,
        res.rows.len(),
        checks.len(),
        paths.results.display()
    );
    Ok(res.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => load(&config).and_then(|c| run(c, out, false)),
        Command::Certify { config, out } => load(&config).and_then(|c| run(c, out, true)),
        Command::ListExperiments => {
            for k in Kind::ALL {
                println!("{:<18} {}", k.name(), k.description());
            }
            Ok(true)
        }
        Command::Selftest { sequential } => {
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            selftest::run_all(exec).map_err(Into::into).map(|reports| {
                for r in &reports {
                    let status = if r.passed() { "ok" } else { "FAILED" };
                    println!(
                        "{:<24} {status:<6} {} instances, {} violations",
                        r.name, r.instances, r.violations
                    );
                    for line in r.detail.iter().take(5) {
                        println!("    {line}");
                    }
                }
                reports.iter().all(|r| r.passed())
            })
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
