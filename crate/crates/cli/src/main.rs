//! `affine-zeta`: periodic-point counts, zeta coefficients, verdicts and
//! automata for dynamically affine maps.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid job, 3 scale exceeded,
//! 4 consistency failure.

mod flags;
mod job;
mod output;
mod run;

use std::io::Write;
use std::process::ExitCode;

use affine_zeta::{scale, Error};
use clap::Parser;

use crate::flags::Cli;
use crate::job::JobSpec;

const INVALID: u8 = 2;
const SCALE: u8 = 3;
const MISMATCH: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ScaleExceeded { .. } | Error::Incomplete(_) | Error::PrecisionExhausted(_) => SCALE,
        Error::Mismatch(_) | Error::NonIntegerCoefficient { .. } | Error::NonIntegerOrbitCount { .. } => MISMATCH,
        Error::Infinite | Error::SingularRoot(_) | Error::NoAdmissibleEll { .. } | Error::DivisionByZeroPoly => 1,
        _ => INVALID,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("affine-zeta: {msg}");
    ExitCode::from(code)
}

fn apply_env() -> Result<(), String> {
    for (var, set) in [
        ("AFFINE_ZETA_MAX_DEGREE", scale::set_max_degree as fn(u64)),
        ("AFFINE_ZETA_MAX_ENUMERATION", scale::set_max_enumeration),
    ] {
        if let Ok(v) = std::env::var(var) {
            set(v.trim().parse().map_err(|_| format!("{var} must be a non-negative integer, got {v:?}"))?);
        }
    }
    Ok(())
}

fn load(cli: &Cli) -> Result<JobSpec, String> {
    let mut job = match (&cli.job, &cli.verb) {
        (Some(path), verb) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let job: JobSpec = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
            if let Some(v) = verb {
                if v.command() != job.command {
                    return Err(format!("{path} is a {:?} job, not {:?}", job.command, v.command()).to_lowercase());
                }
            }
            job
        }
        (None, Some(verb)) => verb.compile()?,
        (None, None) => return Err("give a verb or --job FILE".into()),
    };
    if cli.table {
        job.output.format = job::Format::Table;
    }
    if let Some(path) = &cli.output {
        job.output.path = Some(path.clone());
    }
    job.validate()?;
    Ok(job)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = apply_env() {
        return fail(INVALID, e);
    }
    let job = match load(&cli) {
        Ok(j) => j,
        Err(e) => return fail(INVALID, e),
    };
    if cli.print_job {
        println!("{}", serde_json::to_string_pretty(&job).unwrap());
        return ExitCode::SUCCESS;
    }
    let report = match run::run(&job) {
        Ok(r) => r,
        Err(e) => return fail(exit_code(&e), e),
    };
    let text = output::render(&report.records, job.output.format);
    let written = match &job.output.path {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{path}: {e}")),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        return fail(1, e);
    }
    match report.mismatch {
        Some(m) => fail(MISMATCH, format!("consistency failure: {m}")),
        None => ExitCode::SUCCESS,
    }
}
