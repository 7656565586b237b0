//! Command-line front end and file formats for `opx-core`.

pub mod args;
pub mod commands;
pub mod config;
pub mod parallel;
pub mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::{CommandFactory, Parser};
use opx_core::OpxError;
use serde_json::json;

use crate::args::Cli;
use crate::commands::{echo_args, execute, threads, Context};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] OpxError),
    #[error("config file {path}: {message}")]
    Config { path: String, message: String },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Config { .. } => 2,
            CliError::Core(_) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config { .. } => "config",
            CliError::Json(_) | CliError::Csv(_) => "output",
            CliError::Io(_) => "io",
        }
    }
}

/// Exit code plus the text destined for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

const VALUE_FLAGS: &[&str] = &["--precision-bits", "--seed", "--format", "--config", "--threads"];

/// Index of the innermost subcommand token.
fn subcommand_position(args: &[String]) -> Option<(usize, Vec<String>)> {
    let mut cmd = Cli::command();
    let mut path = Vec::new();
    let mut found = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if VALUE_FLAGS.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            i += 1;
            continue;
        }
        match cmd.find_subcommand(a) {
            Some(sub) => {
                path.push(a.clone());
                found = Some(i);
                cmd = sub.clone();
                if !cmd.has_subcommands() {
                    break;
                }
                i += 1;
            }
            None => break,
        }
    }
    found.map(|f| (f, path))
}

fn accepted_flags(path: &[String]) -> Vec<String> {
    let mut cmd = Cli::command();
    let mut names: Vec<String> = cmd.get_arguments().filter_map(|a| a.get_long().map(String::from)).collect();
    for p in path {
        let Some(sub) = cmd.find_subcommand(p).cloned() else { break };
        names.extend(sub.get_arguments().filter_map(|a| a.get_long().map(String::from)));
        cmd = sub;
    }
    names
}

fn all_flags(cmd: &clap::Command, out: &mut Vec<String>) {
    out.extend(cmd.get_arguments().filter_map(|a| a.get_long().map(String::from)));
    for sub in cmd.get_subcommands() {
        all_flags(sub, out);
    }
}

fn with_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config::config_path(&args) else { return Ok(args) };
    let entries = config::load_config(std::path::Path::new(&path))?;
    let mut known = Vec::new();
    all_flags(&Cli::command(), &mut known);
    if let Some(k) = entries.keys().find(|k| !known.contains(k)) {
        return Err(CliError::Config { path, message: format!("unknown key '{k}'") });
    }
    let Some((at, sub)) = subcommand_position(&args) else { return Ok(args) };
    let accepted = accepted_flags(&sub);
    Ok(config::inject(&args, at, &entries, |k| accepted.iter().any(|a| a == k)))
}

fn failure(command: &str, e: &CliError) -> Outcome {
    let diag = json!({ "command": command, "error": e.kind(), "message": e.to_string() });
    Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("{diag}\n") }
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = argv.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let args = match with_config(args) {
        Ok(a) => a,
        Err(e) => return failure("", &e),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let name = cli.command.name();
    let format = cli.global.format.unwrap_or_else(|| cli.command.default_format());
    let ctx = Context { bits: cli.global.precision_bits, seed: cli.global.seed, threads: threads(cli.global.threads) };
    let start = Instant::now();
    let rendered = execute(&cli.command, &ctx).and_then(|mut report| {
        report.config.push(("precision_bits".into(), ctx.bits.into()));
        report.config.push(("seed".into(), ctx.seed.into()));
        report.config.push(("format".into(), serde_json::to_value(format)?));
        echo_args(&cli.command, &mut report)?;
        let wall = cli.global.timing.then(|| start.elapsed().as_secs_f64());
        report.render(format, wall)
    });
    match rendered {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(e) => failure(name, &e),
    }
}
