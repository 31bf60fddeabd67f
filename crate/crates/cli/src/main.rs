use clap::{Args, Parser, Subcommand};
use routhe_cli::commands::{self, Outcome};
use routhe_cli::config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

/// Forced discrete mechanical systems: batch experiments and invariant checks.
#[derive(Parser)]
#[command(name = "routhe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key=value configuration file (defaults reproduce the
    /// central-potential experiment).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set scenario=bar.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and emit per-step trajectory data.
    Run(Common),
    /// Run the scenario's invariant suite; nonzero exit on any failure.
    Check(Common),
    /// Measure global-error convergence orders against the adaptive oracle.
    Convergence(Common),
}

fn execute(cmd: &Command) -> Outcome {
    let common = match cmd {
        Command::Run(c) | Command::Check(c) | Command::Convergence(c) => c,
    };
    let cfg = match Config::load(common.config.as_deref(), &common.set) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return Outcome::ConfigError;
        }
    };
    let result = match cmd {
        Command::Run(_) => commands::cmd_run(&cfg, &common.out),
        Command::Check(_) => commands::cmd_check(&cfg, &common.out),
        Command::Convergence(_) => commands::cmd_convergence(&cfg, &common.out),
    };
    match result {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            commands::classify(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(execute(&cli.command).code())
}
