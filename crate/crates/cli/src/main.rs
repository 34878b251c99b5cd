//! `qcap`: command-line front end for source decompositions, trade-off
//! curves, generalized capacities and the property-suite runner.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcap_cli::args::*;
use qcap_cli::{commands, verify, CliError, CliResult};

#[derive(Parser)]
#[command(name = "qcap", version, about = "Source decompositions, trade-off curves and capacities of quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies of a state, coherent information of its source marginal,
    /// and the rates of an ensemble through a channel.
    Info(InfoArgs),
    /// Block decomposition of a source state.
    Kid(KidArgs),
    /// Classical/quantum trade-off curve of a channel.
    Curve(CurveArgs),
    /// Generalized capacity of a channel for a source state.
    Capacity(CapacityArgs),
    /// Property-suite runner.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Inequalities among entropies, fidelities and information quantities
    /// on seeded random instances.
    Core(CoreArgs),
    /// Grids of the converse gadgets.
    Converse(ConverseArgs),
    /// Typical-set counts, bounds and sampling.
    Typicality(TypicalityArgs),
    /// All suites with their default settings.
    All(AllArgs),
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QCAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("QCAP_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Info(a) => commands::info(&a),
        Command::Kid(a) => commands::kid(&a),
        Command::Curve(a) => commands::curve(&a),
        Command::Capacity(a) => commands::capacity(&a),
        Command::Verify(VerifyCommand::Core(a)) => verify::core(&a),
        Command::Verify(VerifyCommand::Converse(a)) => verify::converse(&a),
        Command::Verify(VerifyCommand::Typicality(a)) => verify::typicality(&a),
        Command::Verify(VerifyCommand::All(a)) => verify::all(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
