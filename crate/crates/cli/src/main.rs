// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dampest::observables::DEFAULT_GRID_POINTS;
use dampest::oracle::SuiteOptions;
use dampest::response::alpha_min_variance;
use dampest::ProbeClass;
use dampest_cli::commands::{self, CliError, CliResult, Range, SimulateArgs, DEFAULT_SEED};
use dampest_cli::table::Format;

/// Damping-constant estimation with entangled and separable cat-state probes.
#[derive(Debug, Parser)]
#[command(name = "dampest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = Format::Csv, value_parser = parse_format)]
    format: Format,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Undamped X and P variances against the superposition size.
    VarianceCurve {
        #[arg(long, default_value_t = 0.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha_step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Damped X variance of the entangled and separable probes against kappa.
    DampingCurve {
        /// Superposition size [default: maximal noise reduction, about 1.6].
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 5.0)]
        kappa_max: f64,
        #[arg(long, default_value_t = 0.05)]
        kappa_step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Relative improvement over coherent probes at fixed photon budget.
    Improvement {
        #[arg(long, default_value_t = 1.0)]
        n_tot_min: f64,
        #[arg(long, default_value_t = 20.0)]
        n_tot_max: f64,
        #[arg(long, default_value_t = 1.0)]
        n_tot_step: f64,
        #[arg(long, default_value_t = 0.01)]
        kappa: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Budget-constrained optimum per probe class.
    Optimize {
        /// Probe class [default: all four].
        #[arg(long, value_parser = parse_class)]
        class: Option<ProbeClass>,
        #[arg(long, default_value_t = 20.0)]
        n_tot_min: f64,
        #[arg(long, default_value_t = 20.0)]
        n_tot_max: f64,
        #[arg(long, default_value_t = 1.0)]
        n_tot_step: f64,
        #[arg(long, default_value_t = 0.01)]
        kappa: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo homodyne runs compared with the analytic error.
    Simulate {
        #[arg(long, default_value = "I", value_parser = parse_class)]
        class: ProbeClass,
        /// Photon budget per run.
        #[arg(long, default_value_t = 20.0)]
        n_tot: f64,
        #[arg(long, default_value_t = 0.01)]
        kappa: f64,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        /// Superposition size [default: the class optimum for this budget].
        #[arg(long)]
        alpha: Option<f64>,
        /// Measurements per run [default: the class optimum, or 1].
        #[arg(long)]
        n_meas: Option<usize>,
        /// Displacement [default: solved from the budget].
        #[arg(long)]
        x0: Option<f64>,
        /// Suppress the warning for kappa outside the linearization regime.
        #[arg(long)]
        quiet: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Cross-checks against the truncated Fock-space oracle.
    OracleCheck {
        /// Per-mode Fock dimension for every check [default: per check].
        #[arg(long)]
        cutoff: Option<usize>,
        /// Run only this check.
        #[arg(long, value_name = "NAME")]
        check: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_class(s: &str) -> Result<ProbeClass, String> {
    s.parse().map_err(|e: dampest::Error| e.to_string())
}

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Failed(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json_text<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::VarianceCurve { alpha_min, alpha_max, alpha_step, output } => {
            let t = commands::variance_curve(Range { min: alpha_min, max: alpha_max, step: alpha_step })?;
            emit(&output, &t.render(output.format))?;
        }
        Command::DampingCurve { alpha, kappa_max, kappa_step, output } => {
            let alpha = alpha.unwrap_or_else(alpha_min_variance);
            let t = commands::damping_curve(alpha, Range { min: 0.0, max: kappa_max, step: kappa_step })?;
            emit(&output, &t.render(output.format))?;
        }
        Command::Improvement { n_tot_min, n_tot_max, n_tot_step, kappa, output } => {
            let t = commands::improvement(Range { min: n_tot_min, max: n_tot_max, step: n_tot_step }, kappa)?;
            emit(&output, &t.render(output.format))?;
        }
        Command::Optimize { class, n_tot_min, n_tot_max, n_tot_step, kappa, output } => {
            let classes = class.map_or(ProbeClass::ALL.to_vec(), |c| vec![c]);
            let t = commands::optimize(&classes, Range { min: n_tot_min, max: n_tot_max, step: n_tot_step }, kappa)?;
            emit(&output, &t.render(output.format))?;
        }
        Command::Simulate { class, n_tot, kappa, runs, seed, grid_points, alpha, n_meas, x0, quiet, output } => {
            let args = SimulateArgs { class, n_tot, kappa, runs, seed, grid_points, alpha, n_meas, x0 };
            let outcome = commands::simulate(&args)?;
            if !quiet {
                for w in &outcome.warnings {
                    eprintln!("warning: {w}");
                }
            }
            let text = match output.format {
                Format::Csv => outcome.to_table().to_csv(),
                Format::Json => json_text(&outcome),
            };
            emit(&output, &text)?;
            if !outcome.passed() {
                let why = match outcome.report.empirical_stderr {
                    None => "cannot validate a single run (no standard error)".to_string(),
                    Some(se) => format!(
                        "empirical mse {} differs from analytic {} by more than 3 standard errors ({se})",
                        outcome.report.empirical_mse, outcome.report.analytic_mse
                    ),
                };
                eprintln!("validation failed: {why}");
                return Ok(1);
            }
        }
        Command::OracleCheck { cutoff, check, output } => {
            let checks = commands::oracle_check(&SuiteOptions { cutoff, only: check })?;
            let text = match output.format {
                Format::Csv => commands::oracle_table(&checks).to_csv(),
                Format::Json => json_text(&checks),
            };
            emit(&output, &text)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                eprintln!("oracle checks failed: {}", failed.join(", "));
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
