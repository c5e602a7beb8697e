use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jpm_parity_cli::{catalog_json, list_text, load_config, run_scenario, validate, CliError};

#[derive(Parser)]
#[command(name = "jpm-parity", version, about = "Parity-measurement scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output`; stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List scenarios.
    List {
        /// Print a JSON array with each scenario's default config.
        #[arg(long)]
        json: bool,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let result = run_scenario(&cfg)?;
            let csv = result.to_csv();
            match out.or_else(|| cfg.output.as_ref().map(PathBuf::from)) {
                Some(path) => {
                    std::fs::write(&path, csv)?;
                    log::info!("wrote {}", path.display());
                }
                None => print!("{csv}"),
            }
        }
        Command::List { json } => {
            if json {
                println!("{}", catalog_json());
            } else {
                print!("{}", list_text());
            }
        }
        Command::Validate { config } => {
            validate(&load_config(&config)?)?;
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
