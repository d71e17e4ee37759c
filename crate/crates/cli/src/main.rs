use std::process::ExitCode;

use clap::Parser;
use lpframes_cli::args::Cli;
use lpframes_cli::{emit, run, summary, CliError, ExperimentConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = cli.command.split();
    let code = match execute(command, flags) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lpframes: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(command: lpframes_cli::Command, flags: &lpframes_cli::args::Flags) -> Result<i32, CliError> {
    let base = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.overlay(&flags.to_config());
    let outcome = run(command, &cfg)?;
    emit(&outcome, cfg.out.as_deref(), cfg.csv.as_deref())?;
    if cfg.out.is_some() {
        eprint!("{}", summary(&outcome.report));
    }
    Ok(outcome.exit_code())
}
