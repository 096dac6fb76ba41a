//! Command-line front end: run configuration, tabular emitters and the
//! verification suite.

mod config;
mod emit;
mod table;
mod verify;

pub use config::{CommandKind, OutputFormat, RunConfig, DEFAULT_SEED};
pub use emit::{
    emit_exact_table, emit_poisson_table, emit_sample_table, emit_tail_table,
    emit_tree_experiment,
};
pub use table::{write_atomic, Cell, Table};
pub use verify::{run_verify_suite, CheckRecord, Relation, VerificationReport};

use crate::error::{Error, Result};

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Json(_) => exit::IO,
        _ => exit::USAGE,
    }
}

/// Runs a configured command and returns the exit status. Table output goes
/// to `config.output_path` or stdout.
pub fn run(config: &RunConfig) -> Result<i32> {
    config.validate()?;
    let table = match config.command {
        CommandKind::Sample => emit_sample_table(config)?,
        CommandKind::Tail => emit_exact_table(config)?,
        CommandKind::Bounds => emit_tail_table(config)?,
        CommandKind::Poisson => emit_poisson_table(config)?,
        CommandKind::Tree => emit_tree_experiment(config)?,
        CommandKind::Verify => {
            let report = run_verify_suite(config)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            if let Some(path) = &config.report_path {
                write_atomic(path, report.to_json()?.as_bytes())?;
            }
            return Ok(if report.overall_pass {
                exit::SUCCESS
            } else {
                exit::VERIFICATION_FAILED
            });
        }
    };
    table.write(config.output_format, config.output_path.as_deref())?;
    Ok(exit::SUCCESS)
}
