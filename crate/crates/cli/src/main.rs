mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "congestio", version, about = "Hard-congestion limit laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with every invariant monitored.
    Simulate(Args),
    /// The same datum across `gamma_list`.
    Sweep(Args),
    /// Duality-solution checks.
    Duality(Args),
    /// Closed-form nonuniqueness pairs.
    Counterexample(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to the config's `out_dir`, then
    /// `CONGESTIO_OUT`, then the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn output_dir(args: &Args, cfg: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("CONGESTIO_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Simulate(args) | Command::Sweep(args) | Command::Duality(args) | Command::Counterexample(args)) =
        &cli.command;
    let cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let dir = output_dir(args, &cfg);
    let outcome = match &cli.command {
        Command::Simulate(_) => commands::simulate(&cfg, &dir),
        Command::Sweep(a) => commands::sweep(&cfg, &dir, a.workers),
        Command::Duality(_) => commands::duality(&cfg, &dir),
        Command::Counterexample(_) => commands::counterexample(&cfg, &dir),
    };
    match outcome {
        Ok(()) => {
            println!("pass; outputs in {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}: {}", if f.exit_code() == 1 { "fail" } else { "error" }, f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
