//! Concrete oracle: executes a lowered function over explicit inputs and
//! records the variable snapshot at every node entry. Independent of the
//! abstract transfer — arithmetic is done directly on big integers and
//! control flow follows the evaluated conditions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use minisol::ast::{BinaryOp, MiniSolType, UnaryOp};
use minisol::cfg::{Cfg, EdgeKind};
use minisol::domain::{ArithOp, CmpOp, Origin};
use minisol::ir::{CellRef, FunctionIr, InstrKind, Label, Operand};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CValue {
    Int(BigInt),
    Bool(bool),
}

#[derive(Debug, Clone, Default)]
pub struct CState {
    pub vars: BTreeMap<String, CValue>,
    /// Composite contents by canonical cell name, the same granularity the
    /// abstraction tracks.
    pub cells: BTreeMap<String, CValue>,
}

/// Why an execution stopped. All of these are legal terminations; only a
/// stuck interpreter would be a harness bug.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    Returned,
    /// Ran off the synthetic end-of-function node.
    Completed,
    RequireFailed,
    AssertFailed,
    Reverted,
    DivisionByZero,
}

pub struct Trace {
    /// Entry snapshots in execution order.
    pub visits: Vec<(Label, CState)>,
    pub stop: Stop,
}

/// Inputs a run needs: parameters, chain builtins, and initial contents of
/// every state scalar/cell the function may read.
pub type Inputs = BTreeMap<String, CValue>;

/// Variables a run must enumerate: parameters and read state/builtins.
/// Cells are named canonically.
pub fn input_slots(ir: &FunctionIr) -> Vec<(String, MiniSolType, Origin)> {
    let mut out: BTreeMap<String, (MiniSolType, Origin)> = BTreeMap::new();
    for (name, info) in &ir.vars {
        match info.origin {
            Origin::Parameter => {
                out.insert(name.clone(), (info.ty.clone(), info.origin));
            }
            Origin::State if !info.ty.is_composite() => {
                out.insert(name.clone(), (info.ty.clone(), info.origin));
            }
            _ => {}
        }
    }
    for node in &ir.nodes {
        for instr in &node.instrs {
            let mut operands: Vec<&Operand> = Vec::new();
            match &instr.kind {
                InstrKind::Assign { src, .. } => operands.push(src),
                InstrKind::BinOp { lhs, rhs, .. } => {
                    operands.push(lhs);
                    operands.push(rhs);
                }
                InstrKind::UnOp { operand, .. } => operands.push(operand),
                InstrKind::IndexRead { cell, .. } | InstrKind::MemberRead { cell, .. } => {
                    out.insert(
                        cell.canonical.clone(),
                        (cell.value_ty.clone(), Origin::State),
                    );
                    operands.extend(cell.subs.iter().flatten());
                }
                InstrKind::IndexWrite { cell, src } | InstrKind::MemberWrite { cell, src } => {
                    operands.push(src);
                    operands.extend(cell.subs.iter().flatten());
                }
                InstrKind::Return { value: Some(op) } => operands.push(op),
                InstrKind::BuiltinCall { args, .. } => operands.extend(args.iter()),
                _ => {}
            }
            for op in operands {
                if let Operand::Var(name) = op {
                    if let Some(info) = ir.vars.get(name) {
                        if info.origin == Origin::Builtin {
                            out.insert(name.clone(), (info.ty.clone(), info.origin));
                        }
                    }
                }
            }
        }
    }
    out.into_iter().map(|(n, (t, o))| (n, t, o)).collect()
}

pub fn run(ir: &FunctionIr, cfg: &Cfg, inputs: &Inputs) -> Trace {
    let mut state = CState::default();
    for (name, value) in inputs {
        if ir.cells.contains_key(name) {
            state.cells.insert(name.clone(), value.clone());
        } else {
            state.vars.insert(name.clone(), value.clone());
        }
    }

    let mut visits = Vec::new();
    let mut label = cfg.extremal_labels()[0];
    let mut fuel = 10_000u32;
    loop {
        fuel -= 1;
        if fuel == 0 {
            panic!("interpreter ran out of fuel (loop-free functions only)");
        }
        visits.push((label, state.clone()));
        let node = ir.node(label);
        let mut last_condition: Option<bool> = None;
        for instr in &node.instrs {
            match exec_instr(instr, &mut state, ir, inputs) {
                InstrOutcome::Continue => {}
                InstrOutcome::Condition(v) => last_condition = Some(v),
                InstrOutcome::Stop(stop) => return Trace { visits, stop },
            }
        }
        let succs = cfg.successors(label);
        let next = match last_condition {
            Some(true) => succs
                .iter()
                .find(|(_, k)| matches!(k, EdgeKind::BranchTrue | EdgeKind::LoopBody)),
            Some(false) => succs
                .iter()
                .find(|(_, k)| matches!(k, EdgeKind::BranchFalse | EdgeKind::LoopExit)),
            None => succs.first(),
        };
        match next {
            Some((l, _)) => label = *l,
            None => {
                assert_eq!(
                    node.kind,
                    minisol::ir::NodeKind::EndPoint,
                    "stuck at node {label} without a terminator"
                );
                return Trace {
                    visits,
                    stop: Stop::Completed,
                };
            }
        }
    }
}

enum InstrOutcome {
    Continue,
    Condition(bool),
    Stop(Stop),
}

fn exec_instr(
    instr: &minisol::ir::Instr,
    state: &mut CState,
    ir: &FunctionIr,
    inputs: &Inputs,
) -> InstrOutcome {
    match &instr.kind {
        InstrKind::Assign { dst, src } => {
            let v = eval(src, state);
            state.vars.insert(dst.clone(), v);
            InstrOutcome::Continue
        }
        InstrKind::Declare { dst } => {
            let v = match &ir.vars[dst].ty {
                MiniSolType::Bool => CValue::Bool(false),
                _ => CValue::Int(BigInt::zero()),
            };
            state.vars.insert(dst.clone(), v);
            InstrOutcome::Continue
        }
        InstrKind::BinOp { dst, op, lhs, rhs, unsigned } => {
            let a = eval(lhs, state);
            let b = eval(rhs, state);
            let v = match (op, a, b) {
                (BinaryOp::Arith(aop), CValue::Int(x), CValue::Int(y)) => {
                    match concrete_arith(*aop, &x, &y) {
                        Some(r) => {
                            // checked semantics: an unsigned underflow reverts
                            if *unsigned && r.is_negative() {
                                return InstrOutcome::Stop(Stop::AssertFailed);
                            }
                            CValue::Int(r)
                        }
                        None => return InstrOutcome::Stop(Stop::DivisionByZero),
                    }
                }
                (BinaryOp::Cmp(cop), CValue::Int(x), CValue::Int(y)) => {
                    CValue::Bool(concrete_cmp(*cop, &x, &y))
                }
                (BinaryOp::Cmp(cop), CValue::Bool(x), CValue::Bool(y)) => CValue::Bool(match cop {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    _ => panic!("ordered comparison on booleans"),
                }),
                (BinaryOp::And, CValue::Bool(x), CValue::Bool(y)) => CValue::Bool(x && y),
                (BinaryOp::Or, CValue::Bool(x), CValue::Bool(y)) => CValue::Bool(x || y),
                (op, a, b) => panic!("type confusion in interpreter: {op:?} {a:?} {b:?}"),
            };
            state.vars.insert(dst.clone(), v);
            InstrOutcome::Continue
        }
        InstrKind::UnOp { dst, op, operand } => {
            let v = match (op, eval(operand, state)) {
                (UnaryOp::Neg, CValue::Int(x)) => CValue::Int(-x),
                (UnaryOp::Not, CValue::Bool(x)) => CValue::Bool(!x),
                (op, v) => panic!("type confusion in interpreter: {op:?} {v:?}"),
            };
            state.vars.insert(dst.clone(), v);
            InstrOutcome::Continue
        }
        InstrKind::IndexRead { dst, cell } | InstrKind::MemberRead { dst, cell } => {
            let v = read_cell_concrete(cell, state, inputs);
            state.vars.insert(dst.clone(), v);
            InstrOutcome::Continue
        }
        InstrKind::IndexWrite { cell, src } | InstrKind::MemberWrite { cell, src } => {
            let v = eval(src, state);
            state.cells.insert(cell.canonical.clone(), v);
            InstrOutcome::Continue
        }
        InstrKind::Condition { cond } => match state.vars.get(cond) {
            Some(CValue::Bool(v)) => InstrOutcome::Condition(*v),
            other => panic!("condition temp {cond} is {other:?}"),
        },
        InstrKind::Require { cond } => match state.vars.get(cond) {
            Some(CValue::Bool(true)) => InstrOutcome::Continue,
            _ => InstrOutcome::Stop(Stop::RequireFailed),
        },
        InstrKind::Assert { cond } => match state.vars.get(cond) {
            Some(CValue::Bool(true)) => InstrOutcome::Continue,
            _ => InstrOutcome::Stop(Stop::AssertFailed),
        },
        InstrKind::Revert => InstrOutcome::Stop(Stop::Reverted),
        InstrKind::Return { .. } => InstrOutcome::Stop(Stop::Returned),
        InstrKind::BuiltinCall { .. } | InstrKind::Nop => InstrOutcome::Continue,
    }
}

fn eval(op: &Operand, state: &CState) -> CValue {
    match op {
        Operand::Int(v) => CValue::Int(v.clone()),
        Operand::Bool(b) => CValue::Bool(*b),
        Operand::Var(name) => state
            .vars
            .get(name)
            .cloned()
            .unwrap_or_else(|| panic!("read of unset variable {name}")),
    }
}

/// Cells default to the enumerated input when present, else the Solidity
/// zero value.
fn read_cell_concrete(cell: &CellRef, state: &CState, inputs: &Inputs) -> CValue {
    if let Some(v) = state.cells.get(&cell.canonical) {
        return v.clone();
    }
    if let Some(v) = inputs.get(&cell.canonical) {
        return v.clone();
    }
    match cell.value_ty {
        MiniSolType::Bool => CValue::Bool(false),
        _ => CValue::Int(BigInt::zero()),
    }
}

pub fn concrete_arith(op: ArithOp, x: &BigInt, y: &BigInt) -> Option<BigInt> {
    Some(match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => {
            if y.is_zero() {
                return None;
            }
            x / y
        }
        ArithOp::Mod => {
            if y.is_zero() {
                return None;
            }
            x % y
        }
    })
}

pub fn concrete_cmp(op: CmpOp, x: &BigInt, y: &BigInt) -> bool {
    match op {
        CmpOp::Lt => x < y,
        CmpOp::Le => x <= y,
        CmpOp::Gt => x > y,
        CmpOp::Ge => x >= y,
        CmpOp::Eq => x == y,
        CmpOp::Ne => x != y,
    }
}
