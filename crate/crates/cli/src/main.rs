//! `lazynn` command-line harness. Each subcommand fronts one library module
//! and writes `report.json` plus `report.csv` to `--out`.

mod cli;
mod commands;
mod input;
mod params;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use crate::cli::Cli;
use crate::params::Issue;

/// Why a run stopped. Printed to stderr as `{"error": {...}}`.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(Vec<Issue>),
    Runtime(String),
}

impl Failure {
    pub fn runtime(msg: impl Into<String>) -> Self {
        Failure::Runtime(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) | Failure::Validation(_) => 2,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let body = match self {
            Failure::Usage(m) => json!({ "kind": "usage", "message": m }),
            Failure::Validation(issues) => json!({
                "kind": "validation",
                "message": format!("{} invalid setting(s)", issues.len()),
                "issues": issues,
            }),
            Failure::Runtime(m) => json!({ "kind": "runtime", "message": m }),
        };
        json!({ "error": body })
    }
}

impl From<lazynn::Error> for Failure {
    fn from(e: lazynn::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

const THREADS_VAR: &str = "LAZYNN_THREADS";

fn thread_cap() -> Result<Option<usize>, Issue> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Issue {
                flag: THREADS_VAR.into(),
                message: format!("must be a positive integer; got {s:?}"),
            }),
        },
    }
}

fn run(cli: Cli) -> Result<serde_json::Value, Failure> {
    let command = cli.command.name();
    let threads = thread_cap();
    let plan = params::plan(&cli.command, &cli.opts);
    let plan = match (plan, threads) {
        (Ok(plan), Ok(threads)) => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Failure::runtime(e.to_string()))?;
            }
            plan
        }
        (plan, threads) => {
            let mut issues = plan.err().unwrap_or_default();
            issues.extend(threads.err());
            return Err(Failure::Validation(issues));
        }
    };
    let out = cli.opts.out.clone().unwrap_or_else(|| PathBuf::from("lazynn-out"));
    let report = commands::execute(command, plan, &out)?;
    let (json_path, csv_path) = report.write(&out)?;
    Ok(json!({
        "status": "ok",
        "command": command,
        "report": json_path,
        "csv": csv_path,
        "summary": report.summary,
    }))
}

fn main() -> ExitCode {
    let result = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            Err(Failure::Usage(first.trim_start_matches("error: ").to_owned()))
        }
    };
    match result {
        Ok(done) => {
            println!("{done}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
