use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mssq::config::{parse_config_with, Command};
use mssq::experiment::run_command;

#[derive(Parser)]
#[command(name = "mssq", version, about = "Truncated-oscillator spectra, VQE runs and shot-noise scans")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact spectrum, convergence table and ground-state density.
    Spectrum(Common),
    /// Energy-mode VQE with density comparison against the exact ground state.
    Vqe(Common),
    /// Minimise <H^2> for a two-mode family and report <H> and <H^2>.
    Constraint(Common),
    /// Standard deviation of a fixed circuit's estimate against shot count.
    NoiseScan(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(short, long)]
    config: PathBuf,
    /// Override a key, e.g. `--set run.seed=3`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Spectrum(a) => (Command::Spectrum, a),
        Cmd::Vqe(a) => (Command::Vqe, a),
        Cmd::Constraint(a) => (Command::Constraint, a),
        Cmd::NoiseScan(a) => (Command::NoiseScan, a),
    };

    let result = parse_config_with(&args.config, &args.overrides)
        .and_then(|cfg| run_command(command, &cfg).map(|out| (cfg, out)));
    match result {
        Ok((cfg, (summary, files))) => {
            print!("{}", summary.to_text());
            eprintln!("[{}] wrote {} files to {}", command.name(), files.len(), cfg.output_dir().display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mssq {}: {e}", command.name());
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
