//! `cgnet`: command line front end for the transitional-network pipeline.
//!
//! Every subcommand validates its flags and inputs first, computes, and only
//! then writes artifacts to the output directory. A one-line JSON summary
//! goes to stdout. Exit codes: 0 success, 1 validation error, 2 compute
//! error, 3 a reproduction ran but its check did not hold.

mod args;
mod commands;
mod plot;
mod repro;

use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::Cli;

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Compute(String),
    Check(Value),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Compute(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Wraps a library error from the compute phase.
pub fn compute(e: impl std::fmt::Display) -> Failure {
    Failure::Compute(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let name = cli.command.name();
    match commands::run(cli) {
        Ok(summary) => {
            println!("{}", with_status(name, "ok", summary));
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let code = failure.code();
            let summary = match failure {
                Failure::Validation(msg) => {
                    eprintln!("error: {msg}");
                    json!({ "error": "validation", "message": msg })
                }
                Failure::Compute(msg) => {
                    eprintln!("error: {msg}");
                    json!({ "error": "compute", "message": msg })
                }
                Failure::Check(detail) => {
                    eprintln!("check failed");
                    json!({ "error": "check", "detail": detail })
                }
            };
            println!("{}", with_status(name, "failed", summary));
            ExitCode::from(code)
        }
    }
}

fn with_status(command: &str, status: &str, body: Value) -> Value {
    let mut out = json!({ "command": command, "status": status });
    if let (Some(o), Value::Object(b)) = (out.as_object_mut(), body) {
        o.extend(b);
    }
    out
}
