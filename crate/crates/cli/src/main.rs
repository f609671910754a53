use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use grstokes_cli::{run, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "grstokes", version, about = "Gradient-robust compressible Stokes experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// modified, classical or both.
    #[arg(long, global = true)]
    scheme: Option<String>,

    /// Number of meshes in each refinement sequence.
    #[arg(long, global = true)]
    levels: Option<usize>,

    /// Override a config key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Manufactured-solution convergence study.
    Convergence,
    /// Error against the sound-speed constant c on fixed meshes.
    Limit,
    /// Hydrostatic balance on refinement sequences.
    Wellbalanced,
    /// Operator property suite.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let command = match cli.command {
        Sub::Convergence => Command::Convergence,
        Sub::Limit => Command::Limit,
        Sub::Wellbalanced => Command::WellBalanced,
        Sub::Check => Command::Check,
    };
    let mut sets = cli.set.clone();
    if let Some(s) = &cli.scheme {
        sets.push(format!("scheme={s}"));
    }
    if let Some(n) = cli.levels {
        sets.push(format!("levels={n}"));
    }
    let config = ExperimentConfig::from_sources(command, cli.config.as_deref(), &sets)?;
    let outcome = run(&config, &cli.out)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if command == Command::Check {
        println!("{} of {} checks passed", outcome.solves - outcome.failures, outcome.solves);
    } else if outcome.success() {
        println!("{} solves, all converged", outcome.solves);
    } else {
        println!("{} of {} solves did not converge", outcome.failures, outcome.solves);
    }
    Ok(outcome.success())
}
