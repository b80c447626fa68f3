use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proxcat::{run_scenario, Command, RunOptions};

/// Run a proxcat scenario file.
#[derive(Parser)]
#[command(name = "proxcat", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sampled property checks.
    Check(Args),
    /// Proximal point run and rate verification.
    Ppa(Args),
    /// Resolvent curve experiments.
    Curve(Args),
    /// Bound evaluations and monotone-sequence witnesses.
    Rates(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `output`, else out/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PROXCAT_LOG", "off")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Ppa(a) => (Command::Ppa, a),
        Cmd::Curve(a) => (Command::Curve, a),
        Cmd::Rates(a) => (Command::Rates, a),
    };
    let opts = RunOptions { command: Some(command), out: args.out, seed: args.seed };
    match run_scenario(&args.config, &opts) {
        Ok(report) => {
            for line in report.summary_lines() {
                println!("{line}");
            }
            println!("{} {} -> {}", if report.pass { "PASS" } else { "FAIL" }, report.name, report.out_dir.display());
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("proxcat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
