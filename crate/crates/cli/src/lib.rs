//! Library half of the `cclab` command: argument parsing, command
//! implementations and the mapping from failures to exit codes.

mod args;
mod commands;

use std::ffi::OsString;

use clap::Parser;
use serde_json::json;

pub use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;
pub const EXIT_NOT_CONVERGED: i32 = 5;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Invariant(String),
    NotConverged(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Invariant(_) => EXIT_INVARIANT,
            Failure::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Input(m) => ("input", m),
            Failure::Invariant(m) => ("invariant", m),
            Failure::NotConverged(m) => ("not_converged", m),
        };
        json!({ "error": kind, "code": self.code(), "message": message }).to_string()
    }
}

impl From<cclab::Error> for Failure {
    fn from(e: cclab::Error) -> Self {
        use cclab::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter(_) => Failure::Usage(msg),
            E::Parse { .. } | E::Io(_) => Failure::Input(msg),
            E::InvariantViolation(_) | E::Protocol(_) => Failure::Invariant(msg),
        }
    }
}

/// What a command invocation printed and how it exited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the command on a
/// thread pool sized by `CC_THREADS` when set.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: e.render().to_string(),
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: Failure::Usage(e.render().to_string().trim().to_string()).to_json() + "\n",
                },
            };
        }
    };
    let threads = match std::env::var("CC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) => t,
            Err(_) => {
                let f = Failure::Usage(format!("CC_THREADS must be a positive integer, got {v:?}"));
                return failed(String::new(), f);
            }
        },
        Err(_) => 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => return failed(String::new(), Failure::Usage(e.to_string())),
    };
    pool.install(|| match commands::dispatch(&cli) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err((stdout, f)) => failed(stdout, f),
    })
}

fn failed(stdout: String, f: Failure) -> Outcome {
    Outcome {
        code: f.code(),
        stdout,
        stderr: f.to_json() + "\n",
    }
}

pub use commands::{bench_records, parse_rows};
