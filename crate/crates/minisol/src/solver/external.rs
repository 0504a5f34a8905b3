//! External SMT solver invocation: one subprocess per query, SMT-LIB2 on
//! standard input, `sat`/`unsat` expected on standard output. Anything
//! else — timeout, `unknown`, a crash, a missing binary — becomes Unknown
//! and never aborts the analysis.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use crate::solver::query::SatQuery;
use crate::solver::smtlib::emit_smtlib;
use crate::solver::{SatResult, SolverBackend};

pub struct ExternalSmtSolver {
    program: String,
    args: Vec<String>,
    timeout: Duration,
}

impl ExternalSmtSolver {
    /// `command` is whitespace-split: first word the program, the rest its
    /// arguments.
    pub fn from_command(command: &str, timeout: Duration) -> Option<ExternalSmtSolver> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(ExternalSmtSolver {
            program,
            args: parts.collect(),
            timeout,
        })
    }
}

impl SolverBackend for ExternalSmtSolver {
    fn name(&self) -> &str {
        "external-smt"
    }

    fn decide(&self, q: &SatQuery) -> SatResult {
        let script = emit_smtlib(q);
        run_solver(&self.program, &self.args, &script, self.timeout)
    }
}

pub fn run_solver(program: &str, args: &[String], script: &str, timeout: Duration) -> SatResult {
    let mut child = match Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SatResult::unknown(format!("cannot start '{program}': {e}")),
    };

    if let Some(mut stdin) = child.stdin.take() {
        if stdin.write_all(script.as_bytes()).is_err() {
            let _ = child.kill();
            return SatResult::unknown("solver closed its input");
        }
        // EOF tells the solver the script is complete
    }

    let stdout_pipe = child.stdout.take();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut pipe) = stdout_pipe {
            use std::io::Read;
            let _ = pipe.read_to_string(&mut buf);
        }
        let _ = tx.send(buf);
    });

    let deadline = std::time::Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if std::time::Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return SatResult::unknown(format!("solver timed out after {timeout:?}"));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return SatResult::unknown(format!("solver failed: {e}")),
        }
    }
    let stdout = rx
        .recv_timeout(Duration::from_millis(200))
        .unwrap_or_default();
    for line in stdout.lines() {
        match line.trim() {
            "sat" => return SatResult::sat(),
            "unsat" => return SatResult::unsat("external solver answered unsat"),
            "unknown" => return SatResult::unknown("external solver answered unknown"),
            _ => continue,
        }
    }
    SatResult::unknown(format!(
        "unrecognized solver output: {:?}",
        stdout.trim().chars().take(80).collect::<String>()
    ))
}
