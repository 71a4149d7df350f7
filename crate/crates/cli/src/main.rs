//! `ccwb`: runs workbench analyses on JSON scenario files.
//!
//! Exit codes: 0 success, 1 honest negative (nothing found, or provably
//! infeasible), 2 unreadable or malformed input, 3 input violating a type
//! invariant, 4 internal numerical inconsistency.

mod commands;
mod record;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use ccwb_core::Error;
use clap::{Parser, ValueEnum};
use serde_json::json;

use commands::{Command, Failure, Status};
use scenario::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Record,
}

#[derive(Parser)]
#[command(name = "ccwb", version, about = "Common-cause workbench: quantum and classical common causes, Bell correlations, causal regions and a toy net")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,

    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Tolerance override, e.g. `cc_tol=1e-8`; repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VAL", value_parser = parse_override)]
    tol_override: Vec<(String, f64)>,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// The tolerance or invariant an input error violates.
fn invariant(e: &Error) -> &'static str {
    match e {
        Error::NotHermitian { .. } => "tol_herm",
        Error::NotProjection { .. } => "tol_proj",
        Error::NotState { .. } | Error::ZeroWeight(_) => "tol_state",
        Error::NotCommuting { .. } => "comm_tol",
        Error::NotFaithful(_) => "faithful_eps",
        Error::Uncorrelated(_) => "cc_tol",
        Error::NotUnitary(_) => "unitarity (1e-10)",
        Error::NotSpacelike | Error::EmptyRegion | Error::Disconnected(_) | Error::OffLattice(_) => "region",
        Error::DimensionMismatch(..) | Error::NotSquare(..) => "dimensions",
        Error::Range { .. } => "range",
        Error::SizeOutOfRange(_) => "size",
        _ => "precondition",
    }
}

fn exit_for(failure: &Failure) -> (u8, String) {
    match failure {
        Failure::Load(LoadError::Parse(m)) => (2, format!("parse error: {m}")),
        Failure::Usage(m) => (2, format!("usage error: {m}")),
        Failure::Load(LoadError::Invariant(e)) | Failure::Core(e) => match e {
            Error::Inconsistent(_) | Error::ClosureFailure(_) => (4, format!("internal inconsistency: {e}")),
            _ => (3, format!("invariant violation [{}]: {e}", invariant(e))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut sc = match scenario::load_scenario(&cli.scenario) {
        Ok(sc) => sc,
        Err(e) => return fail(&Failure::Load(e)),
    };
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    for (k, v) in &cli.tol_override {
        if !sc.tolerances.set(k, *v) {
            return fail(&Failure::Usage(format!("unknown tolerance `{k}`")));
        }
    }
    let outcome = match commands::run(cli.command, &sc) {
        Ok(o) => o,
        Err(f) => return fail(&f),
    };
    let text = match cli.format {
        Format::Text => {
            let mut s = format!("# {} on {:?} scenario", cli.command.name(), sc.kind);
            if !sc.description.is_empty() {
                s.push_str(&format!(": {}", sc.description));
            }
            s.push('\n');
            for line in &outcome.lines {
                s.push_str(line);
                s.push('\n');
            }
            s.push_str(&format!("outcome: {}\n", outcome.label));
            s
        }
        Format::Record => {
            let record = json!({
                "command": cli.command.name(),
                "kind": sc.kind,
                "seed": sc.seed,
                "tolerances": sc.tolerances,
                "inputs": sc.raw,
                "outcome": outcome.label,
                "result": outcome.result,
            });
            match record::to_record(&record) {
                Ok(s) => s,
                Err(e) => return fail(&Failure::Core(Error::Inconsistent(format!("serialization: {e}")))),
            }
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(m) = written {
        eprintln!("error: {m}");
        return ExitCode::from(2);
    }
    match outcome.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Negative => ExitCode::from(1),
    }
}

fn fail(f: &Failure) -> ExitCode {
    let (code, message) = exit_for(f);
    eprintln!("error: {message}");
    ExitCode::from(code)
}
