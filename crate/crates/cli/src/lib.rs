//! Command-line front end for `lfam-core`: argument handling, config files,
//! the on-disk cache and report rendering.

pub mod args;
pub mod cache;
mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use serde::{Deserialize, Serialize};

pub use args::{Cli, Command, Format, GlobalArgs};
pub use config::{apply_config_file, RunConfig};
pub use output::{Report, Table};

pub const TOOL: &str = "lfam";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lfam_core::Error),
    #[error("environment error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_accuracy() => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 3,
        }
    }
}

/// Result of one subcommand, before it is wrapped in a [`Report`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Outcome {
    pub result: serde_json::Value,
    pub tables: Vec<Table>,
}

/// Runs one configured command on the current rayon pool.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    commands::run(config)
}

/// Runs `config` on a pool of `config.workers` threads and builds the report.
pub fn execute_report(config: &RunConfig) -> Result<Report, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if config.workers > 0 {
        builder = builder.num_threads(config.workers);
    }
    let pool = builder.build().map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| execute(config))?;
    let wall = start.elapsed().as_secs_f64();
    Ok(Report::new(config, outcome, (!config.no_timing).then_some(wall)))
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match run_inner(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{TOOL}: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn clap_message(e: &clap::Error) -> String {
    use clap::CommandFactory;
    let text = e.render().to_string();
    let text = text.strip_prefix("error: ").unwrap_or(&text).trim_end();
    format!("{text}\n\n{}", Cli::command().render_help())
}

fn run_inner(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = apply_config_file(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::Usage(clap_message(&e)));
        }
    };
    let out = cli.global.out.clone();
    let config = RunConfig::from_cli(cli);
    let report = execute_report(&config)?;
    let text = report.render(config.format)?;
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}
