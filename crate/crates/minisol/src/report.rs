//! Report rendering and automatic findings.
//!
//! Each node section groups the state into numeric variables, boolean
//! variables and constraints. Findings cover unreachable code (error) plus
//! interval-derived division-by-zero and array-bounds warnings; warnings
//! are refined through the builtin bounds propagator first, so a guard
//! like `require(b>0)` silences the division warning, and are suppressed
//! on unreachable nodes.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::{transfer_instrs, AbstractState, SolveResult};
use crate::ast::MiniSolType;
use crate::cfg::Cfg;
use crate::domain::{AbstractValue, ArithOp, BoolApprox, CellKey, Interval, Origin};
use crate::ir::{CellRef, FunctionIr, InstrKind, Label};
use crate::solver::{encode_state, tighten, NodeVerdict, Reachability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FindingKind {
    UnreachableCode,
    DivisionByZeroPossible,
    ArrayIndexOutOfBoundsPossible,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::UnreachableCode => "unreachable-code",
            FindingKind::DivisionByZeroPossible => "division-by-zero-possible",
            FindingKind::ArrayIndexOutOfBoundsPossible => "array-index-out-of-bounds-possible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub label: Label,
    pub line: u32,
    pub severity: Severity,
    pub message: String,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericEntry {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BooleanEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeReport {
    pub label: Label,
    pub kind: String,
    pub source: String,
    pub line: u32,
    pub numeric: Vec<NumericEntry>,
    pub boolean: Vec<BooleanEntry>,
    pub constraints: Vec<String>,
    pub reachability: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub function: String,
    pub nodes: Vec<NodeReport>,
    pub findings: Vec<Finding>,
}

/// Addresses are modeled numerically; the numeric block prints them the
/// way the state output spells every chain value.
fn type_display(ty: &MiniSolType) -> String {
    match ty {
        MiniSolType::Address => "uint".to_string(),
        other => other.to_string(),
    }
}

pub fn build_report(
    ir: &FunctionIr,
    cfg: &Cfg,
    solve: &SolveResult,
    verdicts: &BTreeMap<Label, NodeVerdict>,
) -> Report {
    let mut nodes = Vec::new();
    for &label in cfg.labels() {
        let node = ir.node(label);
        let reachability = verdicts
            .get(&label)
            .map(|v| v.reachability)
            .unwrap_or(Reachability::Unknown);
        let (numeric, boolean, constraints) = match solve.entries.get(&label) {
            Some(state) => state_blocks(state, ir),
            None => (Vec::new(), Vec::new(), Vec::new()),
        };
        nodes.push(NodeReport {
            label,
            kind: node.kind.as_str().to_string(),
            source: node.text.clone(),
            line: node.line,
            numeric,
            boolean,
            constraints,
            reachability: reachability.as_str().to_string(),
        });
    }

    let mut findings = detect_unreachable(verdicts, cfg, ir, solve);
    findings.extend(detect_division_hazards(solve, verdicts, ir, cfg));
    findings.extend(detect_oob_hazards(solve, verdicts, ir, cfg));
    findings.sort_by_key(|f| (f.label, f.kind));

    Report {
        function: format!("{}.{}", ir.contract, ir.name),
        nodes,
        findings,
    }
}

fn state_blocks(
    state: &AbstractState,
    ir: &FunctionIr,
) -> (Vec<NumericEntry>, Vec<BooleanEntry>, Vec<String>) {
    let mut numeric = Vec::new();
    let mut boolean = Vec::new();
    for (name, info) in &ir.vars {
        let is_temp = info.origin == Origin::Temporary;
        if info.ty == MiniSolType::Bool {
            let value = state.value(name).and_then(|v| v.as_bool());
            if is_temp && !matches!(value, Some(b) if b != BoolApprox::Empty) {
                continue;
            }
            let def = state.defs.get(name);
            boolean.push(BooleanEntry {
                name: name.clone(),
                expr: def.map(|d| d.text.clone()),
                flag: def.and_then(|d| d.flag.display()).map(str::to_string),
            });
        } else {
            if is_temp {
                continue;
            }
            let value = match state.value(name) {
                Some(v) => v.to_string(),
                None => AbstractValue::bottom_for(&info.ty).to_string(),
            };
            numeric.push(NumericEntry {
                name: name.clone(),
                ty: type_display(&info.ty),
                value,
            });
        }
    }
    let constraints = state.constraints.values().map(|c| c.serialized()).collect();
    (numeric, boolean, constraints)
}

/// Renders one node section in the state-output layout.
pub fn render_node_state(node: &NodeReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("Node {}:{} {}\n", node.label, node.kind, node.source));
    out.push_str("{\n");
    out.push_str("Numeric variables: {\n");
    for e in &node.numeric {
        out.push_str(&format!("    {} {} {}\n", e.name, e.ty, e.value));
    }
    out.push_str("}\n");
    out.push_str("Booleans variables: {\n");
    for e in &node.boolean {
        let mut line = format!("    {} bool", e.name);
        if let Some(expr) = &e.expr {
            line.push(' ');
            line.push_str(expr);
        }
        if let Some(flag) = &e.flag {
            line.push(' ');
            line.push_str(flag);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("}\n");
    out.push_str(&format!("Constraints: [{}]\n", node.constraints.join(", ")));
    out.push_str(&format!("Reachability: {}\n", node.reachability));
    out.push_str("}\n");
    out
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("Function: {}\n\n", report.function));
    for node in &report.nodes {
        out.push_str(&render_node_state(node));
        out.push('\n');
    }
    if report.findings.is_empty() {
        out.push_str("Findings: none\n");
    } else {
        out.push_str("Findings:\n");
        for f in &report.findings {
            let sev = match f.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            out.push_str(&format!(
                "  {sev}[{}] node {} line {}: {}\n",
                f.kind.as_str(),
                f.label,
                f.line,
                f.message
            ));
            for e in &f.evidence {
                out.push_str(&format!("      evidence: {e}\n"));
            }
        }
    }
    out
}

pub fn render_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// One error per maximal unreachable region, reported at the region's first
/// label with the contradicting constraints as evidence.
pub fn detect_unreachable(
    verdicts: &BTreeMap<Label, NodeVerdict>,
    cfg: &Cfg,
    ir: &FunctionIr,
    solve: &SolveResult,
) -> Vec<Finding> {
    let unreachable: BTreeSet<Label> = verdicts
        .iter()
        .filter(|(_, v)| v.reachability == Reachability::Unreachable)
        .map(|(l, _)| *l)
        .collect();
    let mut findings = Vec::new();
    for &label in &unreachable {
        let has_unreachable_pred = cfg
            .predecessors(label)
            .iter()
            .any(|(p, _)| unreachable.contains(p));
        if has_unreachable_pred {
            continue; // interior of a region already reported at its root
        }
        let node = ir.node(label);
        let evidence: Vec<String> = match solve.entries.get(&label) {
            Some(state) => state
                .constraints
                .values()
                .map(|c| c.display_text())
                .collect(),
            None => vec!["no path reaches this node".to_string()],
        };
        findings.push(Finding {
            kind: FindingKind::UnreachableCode,
            label,
            line: node.line,
            severity: Severity::Error,
            message: format!("unreachable code: {}", node.text),
            evidence,
        });
    }
    findings
}

/// Entry state with the constraint-refined interval folded back into each
/// variable and tracked cell.
fn tightened_entry(state: &AbstractState, ir: &FunctionIr) -> AbstractState {
    let mut refined = state.clone();
    let Ok(q) = encode_state(state, ir) else {
        return refined;
    };
    let Some(tight) = tighten(&q) else {
        return refined; // contradictory state; the node is unreachable anyway
    };
    for (name, iv) in tight {
        if name.contains('@') {
            continue; // superseded version, not the current value
        }
        if let Some(AbstractValue::Num(old)) = state.value(&name) {
            refined
                .values
                .insert(name.clone(), AbstractValue::Num(old.meet(&iv)));
            continue;
        }
        if let Some(cell) = ir.cells.get(&name) {
            if let AbstractValue::Num(old) = crate::analysis::read_cell(cell, state, ir) {
                write_tightened_cell(&mut refined, cell, old.meet(&iv), ir);
            }
        }
    }
    refined
}

fn write_tightened_cell(state: &mut AbstractState, cell: &CellRef, iv: Interval, ir: &FunctionIr) {
    let base_ty = &ir.vars[&cell.base].ty;
    let root = state
        .values
        .entry(cell.base.clone())
        .or_insert_with(|| crate::domain::default_for(base_ty, ir.vars[&cell.base].origin));
    set_path(root, &cell.path, AbstractValue::Num(iv));
}

fn set_path(target: &mut AbstractValue, path: &[CellKey], value: AbstractValue) {
    let Some((key, rest)) = path.split_first() else {
        *target = value;
        return;
    };
    if let AbstractValue::Comp(comp) = target {
        if rest.is_empty() {
            comp.set(key.clone(), value);
        } else {
            let vt = comp.value_type(key).cloned();
            let mut inner = match comp.get(key) {
                Some(v) => v.clone(),
                None => match vt {
                    Some(t) => crate::domain::default_for(&t, Origin::State),
                    None => return,
                },
            };
            set_path(&mut inner, rest, value);
            comp.set(key.clone(), inner);
        }
    }
}

/// Warning per division or modulo whose divisor interval contains zero at
/// that instruction's program point, after constraint refinement.
pub fn detect_division_hazards(
    solve: &SolveResult,
    verdicts: &BTreeMap<Label, NodeVerdict>,
    ir: &FunctionIr,
    cfg: &Cfg,
) -> Vec<Finding> {
    let no_def = crate::analysis::engine::loop_assigned_names(ir, cfg);
    let zero = num_bigint::BigInt::from(0);
    let mut findings = Vec::new();
    for &label in cfg.labels() {
        if verdicts.get(&label).map(|v| v.reachability) == Some(Reachability::Unreachable) {
            continue;
        }
        let Some(entry) = solve.entries.get(&label) else {
            continue;
        };
        let node = ir.node(label);
        let refined = tightened_entry(entry, ir);
        for (i, instr) in node.instrs.iter().enumerate() {
            let InstrKind::BinOp {
                op: crate::ast::BinaryOp::Arith(aop),
                rhs,
                ..
            } = &instr.kind
            else {
                continue;
            };
            if !matches!(aop, ArithOp::Div | ArithOp::Mod) {
                continue;
            }
            let Ok(at_point) = transfer_instrs(&node.instrs[..i], &refined, ir, &no_def) else {
                continue;
            };
            let divisor = crate::analysis::eval(rhs, &at_point, ir);
            if let AbstractValue::Num(iv) = &divisor {
                if iv.contains(&zero) {
                    findings.push(Finding {
                        kind: FindingKind::DivisionByZeroPossible,
                        label,
                        line: instr.line,
                        severity: Severity::Warning,
                        message: format!(
                            "divisor may be zero in '{}'",
                            instr.text.as_deref().unwrap_or(&node.text)
                        ),
                        evidence: vec![format!("divisor interval {iv}")],
                    });
                }
            }
        }
    }
    findings
}

/// Warning per fixed-length-array access whose index interval is not
/// contained in the array's range, after constraint refinement.
pub fn detect_oob_hazards(
    solve: &SolveResult,
    verdicts: &BTreeMap<Label, NodeVerdict>,
    ir: &FunctionIr,
    cfg: &Cfg,
) -> Vec<Finding> {
    let no_def = crate::analysis::engine::loop_assigned_names(ir, cfg);
    let mut findings = Vec::new();
    for &label in cfg.labels() {
        if verdicts.get(&label).map(|v| v.reachability) == Some(Reachability::Unreachable) {
            continue;
        }
        let Some(entry) = solve.entries.get(&label) else {
            continue;
        };
        let node = ir.node(label);
        let refined = tightened_entry(entry, ir);
        for (i, instr) in node.instrs.iter().enumerate() {
            let cell = match &instr.kind {
                InstrKind::IndexRead { cell, .. } | InstrKind::IndexWrite { cell, .. } => cell,
                _ => continue,
            };
            let Ok(at_point) = transfer_instrs(&node.instrs[..i], &refined, ir, &no_def) else {
                continue;
            };
            for finding in check_bounds(cell, &at_point, ir) {
                findings.push(Finding {
                    kind: FindingKind::ArrayIndexOutOfBoundsPossible,
                    label,
                    line: instr.line,
                    severity: Severity::Warning,
                    message: format!(
                        "index may fall outside '{}' in '{}'",
                        cell.canonical,
                        instr.text.as_deref().unwrap_or(&node.text)
                    ),
                    evidence: vec![finding],
                });
            }
        }
    }
    findings
}

/// Walks the cell path against the declared type, checking every
/// fixed-length array level's subscript interval against [0, len-1].
fn check_bounds(cell: &CellRef, at_point: &AbstractState, ir: &FunctionIr) -> Vec<String> {
    let mut out = Vec::new();
    let mut ty = ir.vars[&cell.base].ty.clone();
    for (level, key) in cell.path.iter().enumerate() {
        match ty {
            MiniSolType::Array { elem, len } => {
                if let (Some(n), Some(Some(sub))) = (len, cell.subs.get(level)) {
                    let iv = match crate::analysis::eval(sub, at_point, ir) {
                        AbstractValue::Num(iv) => iv,
                        _ => Interval::Empty,
                    };
                    let range = Interval::of(0, n as i64 - 1);
                    if !iv.is_empty() && !iv.leq(&range) {
                        out.push(format!("index interval {iv} exceeds (0,{})", n - 1));
                    }
                }
                ty = *elem;
            }
            MiniSolType::Mapping { value, .. } => {
                ty = *value;
            }
            MiniSolType::Struct { fields, .. } => {
                let next = match key {
                    CellKey::Field(f) => fields.iter().find(|(n, _)| n == f).map(|(_, t)| t.clone()),
                    _ => None,
                };
                match next {
                    Some(t) => ty = t,
                    None => break,
                }
            }
            _ => break,
        }
    }
    out
}
