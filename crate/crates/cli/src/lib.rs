//! Command-line front end: file formats, solver dispatch, JSON run reports
//! and independent verification.

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

pub mod commands;
pub mod formats;
pub mod report;
pub mod verify;

use commands::{dispatch, Cli, CliError};

/// What a run prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let start = Instant::now();
    let result = match cli.global.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Io(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(e) => return Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("{e}\n") },
    };
    if cli.global.timing {
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let json = report.to_json();
    let code = if report.verification.passed { 0 } else { 2 };
    let mut stderr = String::new();
    for c in report.verification.checks.iter().filter(|c| !c.passed) {
        stderr.push_str(&format!("check {} failed: {}\n", c.name, c.detail));
    }
    match &cli.global.json {
        Some(path) => match std::fs::write(path, &json) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr },
            Err(e) => {
                Outcome { code: 1, stdout: String::new(), stderr: format!("io error: {}: {e}\n", path.display()) }
            }
        },
        None => Outcome { code, stdout: json, stderr },
    }
}
