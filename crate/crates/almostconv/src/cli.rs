//! Argument parsing and output plumbing for the `almostconv` binary.

use std::path::PathBuf;
use std::process::ExitCode;

use almostconv_core::detect::CandidateWindow;
use almostconv_core::Norm;
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Outcome};
use crate::config::{parse_vector, RunConfig};
use crate::io::write_atomic;
use crate::parallel;
use crate::report::ERROR_EXIT;

/// Finite-horizon almost-convergence analysis of bounded sequences.
///
/// Exit codes: 0 converges (fekete: holds), 1 diverges (fekete: violated),
/// 2 inconclusive, 3 error.
#[derive(Debug, Parser)]
#[command(name = "almostconv", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the limit and decide strong, quasi and weak almost convergence
    Analyze(Flags),
    /// Test almost convergence to the limit given by --check-limit
    Check(Flags),
    /// Write the samples described by --spec as JSON Lines
    Generate(Flags),
    /// Audit subadditivity of the sliding window-supremum curve
    Fekete(Flags),
    /// Strong almost convergence of a sampled function
    Continuous(Flags),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Limit(pub Vec<f64>);

fn parse_limit(text: &str) -> Result<Limit, String> {
    parse_vector(text).map(Limit).map_err(|e| format!("{e:#}"))
}

fn parse_norm(text: &str) -> Result<Norm, String> {
    text.parse::<Norm>().map_err(|e| e.to_string())
}

fn parse_candidate_window(text: &str) -> Result<CandidateWindow, String> {
    match text {
        "suffix" => Ok(CandidateWindow::Suffix),
        "full" => Ok(CandidateWindow::Full),
        _ => Err(format!("expected suffix or full, got {text:?}")),
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its fields
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Sequence (or function) file in the JSON Lines format
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Generator spec (JSON) to analyse or generate from
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Largest window length N [default: ⌊M/2⌋ capped at 4096; continuous: half the grid]
    #[arg(long, value_name = "N")]
    pub window: Option<usize>,
    /// Convergence tolerance ε [default: 1e-3]
    #[arg(long, value_name = "EPS")]
    pub tol: Option<f64>,
    /// Residual at or above which a run diverges [default: 10ε]
    #[arg(long, value_name = "FLOOR")]
    pub floor: Option<f64>,
    /// Norm on the space: l1, l2 or linf [default: the file's, else l2]
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<Norm>,
    /// Limit to test, e.g. 0.5 or 1,-1
    #[arg(long, value_name = "V", value_parser = parse_limit, allow_hyphen_values = true)]
    pub check_limit: Option<Limit>,
    /// Samples averaged for the estimated limit: suffix (last 3/4) or full [default: suffix]
    #[arg(long, value_name = "WHICH", value_parser = parse_candidate_window)]
    pub candidate_window: Option<CandidateWindow>,
    /// Where to write the JSON report [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub out_report: Option<PathBuf>,
    /// Where to write the curve CSV
    #[arg(long, value_name = "FILE")]
    pub out_curve: Option<PathBuf>,
    /// Seed for random probes and for seeded generator specs [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid step for function input, overriding the file or spec
    #[arg(long, value_name = "H")]
    pub continuous_step: Option<f64>,
    /// Curve CSV to audit (fekete)
    #[arg(long, value_name = "FILE")]
    pub curve: Option<PathBuf>,
    /// Output file for generate [default: stdout]
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

impl Flags {
    fn into_config(self) -> RunConfig {
        RunConfig {
            input: self.input,
            spec: self.spec,
            window: self.window,
            tol: self.tol,
            floor: self.floor,
            norm: self.norm,
            check_limit: self.check_limit.map(|l| l.0),
            candidate_window: self.candidate_window,
            out_report: self.out_report,
            out_curve: self.out_curve,
            seed: self.seed,
            continuous_step: self.continuous_step,
            curve: self.curve,
            output: self.output,
        }
    }
}

/// Runs a parsed command line and returns its exit code.
pub fn run(cli: Cli) -> Result<u8> {
    let (name, flags) = match cli.command {
        Command::Analyze(f) => ("analyze", f),
        Command::Check(f) => ("check", f),
        Command::Generate(f) => ("generate", f),
        Command::Fekete(f) => ("fekete", f),
        Command::Continuous(f) => ("continuous", f),
    };
    let file = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = file.overlay(flags.into_config());
    let pool = parallel::pool(parallel::threads_from_env()?)?;
    let outcome = match name {
        "analyze" => commands::verdict(&config, &pool, false)?,
        "check" => commands::verdict(&config, &pool, true)?,
        "generate" => commands::generate_cmd(&config)?,
        "fekete" => commands::fekete(&config, &pool)?,
        _ => commands::continuous(&config)?,
    };
    emit(&config, &outcome)?;
    Ok(outcome.code)
}

fn emit(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    match &config.out_report {
        Some(path) => write_atomic(path, |w| {
            std::io::Write::write_all(w, outcome.report.as_bytes())?;
            Ok(std::io::Write::write_all(w, b"\n")?)
        })
        .with_context(|| format!("writing report {}", path.display()))?,
        None if outcome.report_to_stdout => println!("{}", outcome.report),
        None => {}
    }
    eprintln!("{}", outcome.summary);
    Ok(())
}

/// Process entry point: usage errors and failures exit with 3.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ERROR_EXIT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
