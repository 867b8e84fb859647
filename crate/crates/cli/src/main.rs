mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::FileConfig;

/// Usage errors exit 1, data errors exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<glossvec_core::Error> for CliError {
    fn from(e: glossvec_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let mut logger = env_logger::Builder::from_env(env_logger::Env::default());
    if cli.no_timestamps {
        logger.format_timestamp(None);
    }
    let _ = logger.try_init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or(file.jobs).unwrap_or(1);
    glossvec_core::exec::set_jobs(jobs);
    let globals = commands::Globals {
        seed: cli.seed.or(file.seed).unwrap_or(42),
        json: cli.json,
    };

    match &cli.command {
        Command::Train(args) => commands::train(args, &file, &globals),
        Command::ExportSenses(args) => commands::export_senses(args),
        Command::Nearest(args) => commands::nearest_cmd(args, &file, &globals),
        Command::Match(args) => commands::match_cmd(args, &file, &globals),
        Command::Disambiguate(args) => commands::disambiguate(args, &file),
        Command::EvalWordsim(args) => commands::eval_wordsim(args, &file, &globals),
        Command::EvalScws(args) => commands::eval_scws(args, &file, &globals),
        Command::EvalWsd(args) => commands::eval_wsd(args, &file, &globals),
        Command::Gradcheck(args) => commands::gradcheck(args, &globals),
    }
}
