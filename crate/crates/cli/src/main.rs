// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! `iqc`: compile, simulate and analyze QFT/IQFT runs on an Ising chain.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;

/// Bad arguments or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Run(String),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<iqc::IqcError> for CliError {
    fn from(e: iqc::IqcError) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "iqc", version, about = "Pulse-level simulator of an Ising-chain quantum computer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an algorithm to pulses and check the pulse count.
    Compile(RunArgs),
    /// Fidelity of one configuration.
    Simulate(RunArgs),
    /// Fidelity along one parameter axis, as CSV.
    Scan(RunArgs),
    /// Correlation matrix of the error generators and its running sum.
    Corr(RunArgs),
    /// Constant-fidelity curves of the closed-form model, as CSV.
    Contour(RunArgs),
    /// Closed-form fidelity prediction and crossover strength.
    Predict(RunArgs),
}

/// Flags shared by every subcommand. Each overrides the config-file key of
/// the same name.
#[derive(Args)]
struct RunArgs {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent. For `compile`, receives the schedule JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Lift the qubit-count guardrails.
    #[arg(long)]
    allow_large: bool,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// intrinsic, gue-gate, gue-gate-lab, gue-pulse, gue-pulse-lab or combined.
    #[arg(long)]
    errors: Option<String>,
    #[arg(long)]
    realizations: Option<String>,
    /// Random states per run; 0 averages exactly over Haar states.
    #[arg(long)]
    states: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Scan axis: k, a, n or delta.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated scan values or contour abscissae.
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    f0: Option<String>,
    /// Contour axes: ka-delta, delta-n or ka-n.
    #[arg(long)]
    plane: Option<String>,
    /// Compiled schedule JSON to use instead of compiling `algo`.
    #[arg(long)]
    schedule: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, UsageError> {
        let overrides = [
            ("algo", self.algo.clone()),
            ("n", self.n.clone()),
            ("a", self.a.clone()),
            ("k", self.k.clone()),
            ("delta", self.delta.clone()),
            ("errors", self.errors.clone()),
            ("realizations", self.realizations.clone()),
            ("states", self.states.clone()),
            ("seed", self.seed.clone()),
            ("sweep", self.sweep.clone()),
            ("values", self.values.clone()),
            ("f0", self.f0.clone()),
            ("plane", self.plane.clone()),
            ("schedule", self.schedule.clone()),
        ];
        ExperimentConfig::load(self.config.as_deref(), &overrides)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match &cli.command {
        Command::Compile(a) => ("compile", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Scan(a) => ("scan", a),
        Command::Corr(a) => ("corr", a),
        Command::Contour(a) => ("contour", a),
        Command::Predict(a) => ("predict", a),
    };
    let cfg = args.config()?;
    let ctx = commands::Context { command: name, cfg, out: args.out.clone(), allow_large: args.allow_large };
    match cli.command {
        Command::Compile(_) => commands::compile(&ctx),
        Command::Simulate(_) => commands::simulate(&ctx),
        Command::Scan(_) => commands::scan(&ctx),
        Command::Corr(_) => commands::corr(&ctx),
        Command::Contour(_) => commands::contour(&ctx),
        Command::Predict(_) => commands::predict(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(UsageError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
