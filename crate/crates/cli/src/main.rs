use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonholo_cli::error::{EXIT_FAILURE, EXIT_OK};
use nonholo_cli::{commands, load_config, CliError, SEED_ENV};

/// Simulate rolling bodies and verify their gauge momenta and brackets.
#[derive(Parser)]
#[command(name = "nonholo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured system; CSV to --out, drift summary on stdout.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification battery; JSON report on stdout.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Tabulate the gauge momentum coefficients; CSV to --out.
    Momenta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("summary is always serialisable"));
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let seed = std::env::var(SEED_ENV).ok();
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = load_config(&config, seed.as_deref())?;
            print_json(&commands::simulate(&cfg, &out)?);
            Ok(EXIT_OK)
        }
        Command::Check { config } => {
            let cfg = load_config(&config, seed.as_deref())?;
            let report = commands::check(&cfg);
            println!("{}", report.to_json());
            for c in report.checks.iter().filter(|c| !c.passed()) {
                log::error!("check {} failed: measured {} (tolerance {})", c.name, c.measured, c.tolerance);
            }
            Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Momenta { config, out } => {
            let cfg = load_config(&config, seed.as_deref())?;
            print_json(&commands::momenta(&cfg, &out)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
