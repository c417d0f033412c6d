use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use laxforge::harness::{run_suite, Fault, SuiteConfig};
use laxforge::{LaxError, Result};

#[derive(Parser)]
#[command(name = "laxforge", version, about = "Numerical verification of sl2 Lax pairs and Darboux charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON report.
    Verify {
        /// JSON configuration; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated suites to run.
        #[arg(long, value_delimiter = ',')]
        suite: Option<Vec<String>>,
        /// Tolerance override `check=value`, repeatable.
        #[arg(long)]
        tol: Vec<String>,
        /// Report path; the report goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perturb H, nu or F.
        #[arg(long)]
        fault_inject: Option<Fault>,
    },
}

fn load_config(
    config: Option<PathBuf>,
    seed: Option<u64>,
    suite: Option<Vec<String>>,
    tol: Vec<String>,
    fault_inject: Option<Fault>,
) -> Result<SuiteConfig> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LaxError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| LaxError::Config(format!("{}: {e}", path.display())))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = suite {
        cfg.suites = s;
    }
    for entry in tol {
        let (k, v) = entry.split_once('=').ok_or_else(|| LaxError::Config(format!("`{entry}` is not check=value")))?;
        let v: f64 = v.parse().map_err(|_| LaxError::Config(format!("`{v}` is not a number")))?;
        cfg.tol.insert(k.to_string(), v);
    }
    if fault_inject.is_some() {
        cfg.fault_inject = fault_inject;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let Command::Verify { config, seed, suite, tol, out, fault_inject } = Cli::parse().command;
    let report = match load_config(config, seed, suite, tol, fault_inject).and_then(|cfg| run_suite(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("laxforge: {e}");
            return ExitCode::from(2);
        }
    };
    let json = report.to_json();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, json) {
                eprintln!("laxforge: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    for r in report.records.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} seed {} {}: {:?} {}", r.case, r.seed, r.check, r.residual, r.error.as_deref().unwrap_or(""));
    }
    eprintln!("{} checks, {} passed, {} failed", report.summary.total, report.summary.passed, report.summary.failed);
    ExitCode::from(report.exit_code() as u8)
}
