//! Command-line front end of the `wkbflow` binary.

use crate::acceptance;
use crate::checks::{run_suite, CheckReport, SUITES};
use crate::compare;
use crate::config::{FullTier, RunConfig, Tier};
use crate::convergence;
use crate::error::{LabError, LabResult};
use crate::runs;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

/// Environment variable capping the worker threads of parameter sweeps.
pub const THREADS_VAR: &str = "WKBFLOW_THREADS";

#[derive(Parser, Debug)]
#[command(name = "wkbflow", version, about = "Wave/mean-flow solvers on the periodic torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum FullArg {
    Base,
    Extended,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the base (single-scale) tier.
    RunBase(RunArgs),
    /// Run the extended (x, θ) tier.
    RunExtended(RunArgs),
    /// Run the reduced wave/mean-flow tier.
    RunReduced(RunArgs),
    /// Compare a full tier with the reduced tier over a list of eps.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated eps values (default: compare.eps_list).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Full tier (default: compare.full_tier).
        #[arg(long, value_enum)]
        full: Option<FullArg>,
    },
    /// eps-refinement study of the slow-manifold lift.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Run a check suite (`all` runs every suite, `acceptance` the criteria).
    Check {
        suite: String,
        /// Optional configuration for the `cross-tier` suite.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for the JSON report (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> LabResult<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        Ok(cfg)
    }
}

/// Caps the global rayon pool from `WKBFLOW_THREADS` if set.
pub fn configure_threads() -> LabResult<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| LabError::Config(format!("{THREADS_VAR}={v} is not a positive integer")))?;
    // A second initialisation in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_check(report: &impl serde::Serialize, out: &Option<PathBuf>, name: &str) -> LabResult<()> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join(format!("check_{name}.json")), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

fn check(suite: &str, config: &Option<PathBuf>, out: &Option<PathBuf>) -> LabResult<bool> {
    let cfg = config.as_ref().map(RunConfig::load).transpose()?;
    if suite == "acceptance" {
        let results = acceptance::run_all();
        for r in &results {
            println!("{}", r.line());
        }
        let reports: Vec<CheckReport> = results
            .iter()
            .map(|r| CheckReport::new(&format!("criterion {}: {}", r.id, r.title), r.entries.clone()))
            .collect();
        write_check(&reports, out, "acceptance")?;
        return Ok(results.iter().all(|r| r.passed));
    }
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    for name in names {
        let report = run_suite(name, cfg.as_ref())
            .ok_or_else(|| LabError::Config(format!("unknown suite '{name}'; known: {}, all, acceptance", SUITES.join(", "))))?;
        reports.push(report);
    }
    println!("{}", serde_json::to_string_pretty(&reports)?);
    write_check(&reports, out, suite)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn execute(cli: &Cli) -> LabResult<i32> {
    configure_threads()?;
    match &cli.command {
        Command::RunBase(a) | Command::RunExtended(a) | Command::RunReduced(a) => {
            let tier = match cli.command {
                Command::RunBase(_) => Tier::Base,
                Command::RunExtended(_) => Tier::Extended,
                _ => Tier::Reduced,
            };
            let report = runs::run(&a.load()?.with_tier(tier))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(EXIT_OK)
        }
        Command::Compare { run, eps, full } => {
            let cfg = run.load()?;
            let eps = eps.clone().unwrap_or_else(|| cfg.compare.eps_list.clone());
            let full = match full {
                Some(FullArg::Base) => FullTier::Base,
                Some(FullArg::Extended) => FullTier::Extended,
                None => cfg.compare.full_tier,
            };
            let report = compare::compare(&cfg, &eps, full)?;
            compare::write_report(&report, &cfg.output.dir)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Convergence { run, eps } => {
            let cfg = run.load()?;
            let eps = eps.clone().unwrap_or_else(|| cfg.compare.eps_list.clone());
            let report = convergence::study(&cfg, &eps)?;
            convergence::write_report(&report, &cfg.output.dir)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(EXIT_OK)
        }
        Command::Check { suite, config, out } => Ok(if check(suite, config, out)? { EXIT_OK } else { EXIT_CHECK_FAILED }),
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wkbflow: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_arguments_are_config_errors() {
        assert_eq!(main_with_args(["wkbflow", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["wkbflow", "run-base", "--config", "/nonexistent.toml"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["wkbflow", "check", "no-such-suite"]), EXIT_CONFIG);
    }
}
