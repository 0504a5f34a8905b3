//! Command-line front end: analyze one function of one contract and write
//! the state report.
//!
//! Exit codes: 0 no findings, 1 warnings only, 2 errors (unreachable
//! code), 3 usage or analysis failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use minisol::pipeline::{analyze_file, AnalysisOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "minisol",
    about = "Interval analysis with path constraints for a small Solidity-like language",
    disable_help_subcommand = true
)]
struct Args {
    /// Source file to analyze.
    #[arg(long)]
    file: PathBuf,

    /// Contract name inside the file.
    #[arg(long)]
    contract: String,

    /// Function to analyze.
    #[arg(long)]
    function: String,

    /// Report destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// External SMT-LIB2 solver command, e.g. "z3 -in".
    #[arg(long)]
    solver: Option<String>,

    /// Directory for one .smt2 file per node.
    #[arg(long)]
    emit_smt: Option<PathBuf>,

    /// Write the control-flow graph in DOT format.
    #[arg(long)]
    dump_cfg: Option<PathBuf>,

    /// Per-query solver timeout in milliseconds.
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };

    let options = AnalysisOptions {
        solver_command: args.solver.clone(),
        timeout: Duration::from_millis(args.timeout_ms),
        emit_smt_dir: args.emit_smt.clone(),
        dump_cfg: args.dump_cfg.clone(),
    };

    let outcome = match analyze_file(&args.file, &args.contract, &args.function, &options) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };

    let rendered = match args.format {
        Format::Text => outcome.text(),
        Format::Json => outcome.json(),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{rendered}"),
    }

    ExitCode::from(outcome.exit_code() as u8)
}
