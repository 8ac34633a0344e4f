mod args;
mod commands;
mod config;
mod error;
mod io;

use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::config::Settings;
use crate::error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli.common)?;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Encode => commands::encode(&settings),
        Command::Train => commands::train_cmd(&settings),
        Command::Refine => commands::refine_cmd(&settings),
        Command::Synth => commands::synth(&settings),
        Command::Eval => commands::eval(&settings),
        Command::Dot => commands::dot(&settings),
    }
}

fn main() -> ExitCode {
    let result = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            Err(CliError::usage(first.trim_start_matches("error: ")))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.kind.exit_code())
        }
    }
}
