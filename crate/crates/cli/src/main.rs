//! `resoline` command-line front end. Exit status 0 on success, 1 on usage,
//! file or input errors, 2 on numerical failure or a violated threshold.

mod commands;
mod error;
mod options;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::error::CliError;
use crate::options::Options;

#[derive(Debug, Parser)]
#[command(
    name = "resoline",
    version,
    about = "Scattering data, resonances and kernels of compactly supported potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Run {
    /// JSON file of option values; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// X̂, Ŷ, det S and the unitary residual on a rectangular k grid (CSV).
    ScatteringGrid(Run),
    /// Wave kernels on the characteristic lattice.
    Kernels(Run),
    /// Zeros of X̂ in the lower half-plane within a radius.
    Resonances(Run),
    /// Bound-state energies.
    BoundStates(Run),
    /// Resonance density per near-real sector against d/2π.
    Density(Run),
    /// Indicator diagram of X̂ or of a windowed kernel transform.
    Indicator(Run),
    /// Cartwright integral of X̂ together with the density check.
    CartwrightCheck(Run),
    /// Nevanlinna-Levin representation residual at a point of the upper half-plane.
    NevanlinnaCheck(Run),
    /// Indicator width and zeros of the difference of two windowed transforms.
    GExperiment(Run),
    /// Distances between the scattering data of two potentials sharing their right part.
    Distinguish(Run),
    /// Recover the left part from det S samples or resonances.
    InverseRecover(Run),
    /// Seeded random test potential.
    RandomPotential(Run),
}

impl Command {
    fn parts(&self) -> (&'static str, &Run, fn(&Options) -> Result<Outcome, CliError>) {
        match self {
            Self::ScatteringGrid(r) => ("scattering-grid", r, commands::scattering_grid),
            Self::Kernels(r) => ("kernels", r, commands::kernels),
            Self::Resonances(r) => ("resonances", r, commands::resonances_cmd),
            Self::BoundStates(r) => ("bound-states", r, commands::bound_states_cmd),
            Self::Density(r) => ("density", r, commands::density),
            Self::Indicator(r) => ("indicator", r, commands::indicator),
            Self::CartwrightCheck(r) => ("cartwright-check", r, commands::cartwright_check),
            Self::NevanlinnaCheck(r) => ("nevanlinna-check", r, commands::nevanlinna_check),
            Self::GExperiment(r) => ("g-experiment", r, commands::g_experiment),
            Self::Distinguish(r) => ("distinguish", r, commands::distinguish),
            Self::InverseRecover(r) => ("inverse-recover", r, commands::inverse_recover),
            Self::RandomPotential(r) => ("random-potential", r, commands::random_potential_cmd),
        }
    }
}

fn resolve(name: &str, run: &Run) -> Result<Options, CliError> {
    let file = match &run.config {
        Some(p) => Options::from_file(p)?,
        None => Options::default(),
    };
    if let Some(c) = &file.command {
        if c != name {
            return Err(CliError::Usage(format!("config is for `{c}`, not `{name}`")));
        }
    }
    let opts = run.options.clone().over(file);
    for p in opts.input_paths() {
        if !p.is_file() {
            return Err(CliError::file(p, "no such file"));
        }
    }
    for p in opts.output_paths() {
        let dir = p.parent().filter(|d| !d.as_os_str().is_empty());
        if dir.is_some_and(|d| !d.is_dir()) {
            return Err(CliError::file(p, "output directory does not exist"));
        }
    }
    Ok(opts)
}

fn execute(command: &Command) -> Result<bool, CliError> {
    let (name, run, body) = command.parts();
    let opts = resolve(name, run)?;
    let outcome = body(&opts)?;
    outcome.outputs.write_all()?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
