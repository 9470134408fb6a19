//! Command-line harness: verification suite, parameter sweeps, the
//! randomness-amplification protocol and dilation checks.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

use config::{Cli, Command, CommandArgs, Format, RunConfig};
use error::{CliError, CliResult};
use report::{RoundLogRow, SweepRow};

/// Parses `args` (program name first) and runs the command. Errors are
/// printed to stderr; the return value is the process exit code.
pub fn run<I, T>(args: I, env_seed: Option<String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match load(&cli.command, env_seed.as_deref()).and_then(|cfg| execute(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(command: &CommandArgs, env_seed: Option<&str>) -> CliResult<RunConfig> {
    let opts = match command {
        CommandArgs::Verify(o)
        | CommandArgs::Sweep(o)
        | CommandArgs::Randamp(o)
        | CommandArgs::DilationCheck(o)
        | CommandArgs::DimScan(o) => o,
    };
    let text = opts.config.as_deref().map(config::read_config_file).transpose()?;
    config::parse_config(command, text.as_deref(), env_seed)
}

pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    match cfg.command {
        Command::Verify => {
            let report = commands::verify(cfg)?;
            write_output(cfg.out.as_deref(), &to_json(&report)?)?;
            if !report.pass {
                return Err(CliError::VerificationFailed);
            }
        }
        Command::Sweep | Command::DimScan => {
            let rows = if cfg.command == Command::Sweep {
                commands::sweep(cfg)?
            } else {
                commands::dim_scan(cfg)?
            };
            write_output(cfg.out.as_deref(), &render_rows(&rows, cfg.format)?)?;
        }
        Command::DilationCheck => {
            let (rows, ok) = commands::dilation_check(cfg)?;
            write_output(cfg.out.as_deref(), &render_rows(&rows, cfg.format)?)?;
            if !ok {
                return Err(CliError::VerificationFailed);
            }
        }
        Command::Randamp => {
            let (report, records) = commands::randamp(cfg)?;
            if let Some(log) = &cfg.log {
                let rows: Vec<RoundLogRow> = records
                    .iter()
                    .enumerate()
                    .map(|(round, r)| RoundLogRow {
                        round,
                        input_bit: r.input_bit,
                        alice_op: match r.alice_op {
                            ptsim::AliceOp::Identity => "identity",
                            ptsim::AliceOp::FlipX => "flip_x",
                        },
                        success: r.success,
                        bob_outcome: r.bob_outcome,
                        decoded_bit: r.decoded_bit,
                        kept: r.kept,
                    })
                    .collect();
                write_output(Some(log), &to_csv(&rows)?)?;
            }
            write_output(cfg.out.as_deref(), &to_json(&report)?)?;
        }
    }
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// CSV always carries the header, even with no rows.
pub fn render_rows(rows: &[SweepRow], format: Format) -> CliResult<String> {
    match format {
        Format::Json => to_json(&rows),
        Format::Csv if rows.is_empty() => Ok("family,dim,alpha,p,t,quantity,brute,closed_form,abs_err\n".into()),
        Format::Csv => to_csv(rows),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
