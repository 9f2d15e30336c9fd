use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tprf_cli::{run_file, Command};

#[derive(Parser)]
#[command(
    name = "tprf",
    version,
    about = "Two-photon resonance fluorescence scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Inelastic power spectrum of one line
    Spectrum(RunArgs),
    /// Normalized second-order correlation, optionally filtered
    G2(RunArgs),
    /// Flux and g2(0) over a drive-strength or detuning grid
    Sweep(RunArgs),
    /// Full model against the closed-form flux and g2(0)
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output stem; writes <stem>.csv and <stem>.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::G2(a) => (Command::G2, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Validate(a) => (Command::Validate, a),
    };
    let result = run_file(
        command,
        &args.config,
        args.out.as_deref(),
        args.jobs.map(usize::from),
    )
    .and_then(|(artifacts, stem)| {
        for w in &artifacts.summary.warnings {
            eprintln!("warning: {w}");
        }
        artifacts.write(&stem)
    });
    match result {
        Ok((csv, json)) => {
            println!("{}", csv.display());
            println!("{}", json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
