//! End-to-end pipeline: source text to report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::analysis::{worklist_solve, SolveResult};
use crate::cfg::Cfg;
use crate::ir::{lower_contract, FunctionIr, Label};
use crate::parser::parse_contract;
use crate::report::{build_report, render_json, render_text, Report, Severity};
use crate::solver::{
    classify_reachability, emit_smtlib, encode_state, BuiltinSolver, ExternalSmtSolver,
    NodeVerdict, SolverBackend,
};
use crate::token::tokenize;
use crate::types::check_types;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Lex(#[from] crate::token::LexError),
    #[error("{0}")]
    Parse(#[from] crate::parser::ParseError),
    #[error("{0}")]
    Type(#[from] crate::types::TypeError),
    #[error("{0}")]
    Lowering(#[from] crate::ir::LoweringError),
    #[error("{0}")]
    Cfg(#[from] crate::cfg::CfgError),
    #[error("{0}")]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error("contract '{0}' not found")]
    UnknownContract(String),
    #[error("function '{0}' not found in contract '{1}'")]
    UnknownFunction(String, String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// External SMT solver command; when set it joins the backend chain
    /// after the builtin checker.
    pub solver_command: Option<String>,
    pub timeout: Duration,
    /// Directory to receive one `node_<label>.smt2` per analyzed node.
    pub emit_smt_dir: Option<PathBuf>,
    /// Path for a DOT dump of the control-flow graph.
    pub dump_cfg: Option<PathBuf>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            solver_command: None,
            timeout: Duration::from_millis(5000),
            emit_smt_dir: None,
            dump_cfg: None,
        }
    }
}

pub struct AnalysisOutcome {
    pub report: Report,
    pub ir: FunctionIr,
    pub cfg: Cfg,
    pub solve: SolveResult,
    pub verdicts: BTreeMap<Label, NodeVerdict>,
}

impl AnalysisOutcome {
    pub fn text(&self) -> String {
        render_text(&self.report)
    }

    pub fn json(&self) -> String {
        render_json(&self.report)
    }

    /// 0: clean; 1: warnings only; 2: at least one error finding.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for f in &self.report.findings {
            match f.severity {
                Severity::Error => return 2,
                Severity::Warning => code = 1,
            }
        }
        code
    }
}

pub fn analyze_source(
    source: &str,
    contract: &str,
    function: &str,
    options: &AnalysisOptions,
) -> Result<AnalysisOutcome, PipelineError> {
    let tokens = tokenize(source)?;
    let ast = parse_contract(&tokens)?;
    if ast.name != contract {
        return Err(PipelineError::UnknownContract(contract.to_string()));
    }
    let ast = check_types(ast)?;
    let contract_ir = lower_contract(&ast, source)?;
    let ir = contract_ir
        .function(function)
        .cloned()
        .ok_or_else(|| PipelineError::UnknownFunction(function.to_string(), contract.to_string()))?;
    let cfg = Cfg::build(&ir)?;
    let solve = worklist_solve(&ir, &cfg)?;

    let builtin = BuiltinSolver;
    let external = options
        .solver_command
        .as_deref()
        .and_then(|cmd| ExternalSmtSolver::from_command(cmd, options.timeout));
    let mut backends: Vec<&dyn SolverBackend> = vec![&builtin];
    if let Some(ext) = &external {
        backends.push(ext);
    }
    let verdicts = classify_reachability(&solve, &ir, &cfg, &backends);

    if let Some(dir) = &options.emit_smt_dir {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::Output {
            path: dir.clone(),
            source: e,
        })?;
        for (label, state) in &solve.entries {
            if let Ok(q) = encode_state(state, &ir) {
                let path = dir.join(format!("node_{label}.smt2"));
                std::fs::write(&path, emit_smtlib(&q)).map_err(|e| PipelineError::Output {
                    path: path.clone(),
                    source: e,
                })?;
            }
        }
    }
    if let Some(path) = &options.dump_cfg {
        std::fs::write(path, cfg.to_dot(&ir)).map_err(|e| PipelineError::Output {
            path: path.clone(),
            source: e,
        })?;
    }

    let report = build_report(&ir, &cfg, &solve, &verdicts);
    Ok(AnalysisOutcome {
        report,
        ir,
        cfg,
        solve,
        verdicts,
    })
}

pub fn analyze_file(
    path: &Path,
    contract: &str,
    function: &str,
    options: &AnalysisOptions,
) -> Result<AnalysisOutcome, PipelineError> {
    let source = std::fs::read_to_string(path).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    analyze_source(&source, contract, function, options)
}
