//! The per-node transfer function and the edge-level constraint discipline.
//!
//! A node executes its IR sequence over the incoming state. Conditions do
//! not modify the variable map; require/assert only flag their operand —
//! the constraint itself is imposed on the outgoing edge. Assignments bump
//! the target's version; active constraints are never rewritten, they stay
//! bound to the version they were imposed on.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::analysis::constraint::{Constraint, ConstraintOrigin};
use crate::analysis::expr::{Atom, BoolExpr, CondFlag, Definition, NumExpr, SymExpr};
use crate::analysis::state::AbstractState;
use crate::analysis::AnalysisError;
use crate::ast::{BinaryOp, MiniSolType, UnaryOp};
use crate::cfg::{Cfg, EdgeKind};
use crate::domain::{
    arith, compare, default_for, AbstractValue, BoolApprox, CellKey, CompositeValue, Interval,
    Origin,
};
use crate::ir::{CellRef, FunctionIr, Instr, InstrKind, IrNode, Label, Operand};

/// Inlined definitions larger than this fall back to plain atoms.
const MAX_DEF_SIZE: usize = 64;

/// How operands are turned into symbolic expressions.
///
/// The solver view substitutes every definition it can trust; the display
/// view only substitutes temporaries, so constraint texts keep the
/// variable names the source uses.
#[derive(Clone, Copy, PartialEq)]
enum Inline {
    Solver,
    Display,
}

pub fn transfer(
    node: &IrNode,
    input: &AbstractState,
    ir: &FunctionIr,
    no_def: &BTreeSet<String>,
) -> Result<AbstractState, AnalysisError> {
    transfer_instrs(&node.instrs, input, ir, no_def)
}

/// Runs a slice of a node's instruction sequence; detectors use this to
/// evaluate operands at an instruction's own program point.
pub fn transfer_instrs(
    instrs: &[Instr],
    input: &AbstractState,
    ir: &FunctionIr,
    no_def: &BTreeSet<String>,
) -> Result<AbstractState, AnalysisError> {
    let mut state = input.clone();
    let xf = Xfer { ir, no_def };
    for instr in instrs {
        xf.step(instr, &mut state)?;
    }
    Ok(state)
}

struct Xfer<'a> {
    ir: &'a FunctionIr,
    /// Names whose definitions are never recorded: variables reassigned
    /// inside a loop body, where one iteration invalidates the equation.
    no_def: &'a BTreeSet<String>,
}

impl<'a> Xfer<'a> {
    fn step(&self, instr: &Instr, state: &mut AbstractState) -> Result<(), AnalysisError> {
        match &instr.kind {
            InstrKind::Assign { dst, src } => {
                let value = self.eval(src, state);
                let exprs = self.sym_pair(src, state);
                self.write_var(dst, value, exprs, instr, state);
            }
            InstrKind::Declare { dst } => {
                let ty = &self.ir.vars[dst].ty;
                let value = zero_value(ty);
                let exprs = if *ty == MiniSolType::Bool {
                    Some((
                        SymExpr::Bool(BoolExpr::Const(false)),
                        SymExpr::Bool(BoolExpr::Const(false)),
                    ))
                } else if ty.is_numeric() {
                    Some((
                        SymExpr::Num(NumExpr::Const(BigInt::from(0))),
                        SymExpr::Num(NumExpr::Const(BigInt::from(0))),
                    ))
                } else {
                    None
                };
                self.write_var(dst, value, exprs, instr, state);
            }
            InstrKind::BinOp {
                dst,
                op,
                lhs,
                rhs,
                unsigned,
            } => {
                let lv = self.eval(lhs, state);
                let rv = self.eval(rhs, state);
                let value = match op {
                    BinaryOp::Arith(aop) => {
                        let (iv, _) = match (lv.as_interval(), rv.as_interval()) {
                            (Some(a), Some(b)) => arith(*aop, a, b, *unsigned),
                            _ => (Interval::Empty, Default::default()),
                        };
                        AbstractValue::Num(iv)
                    }
                    BinaryOp::Cmp(cop) => {
                        let approx = match (&lv, &rv) {
                            (AbstractValue::Num(a), AbstractValue::Num(b)) => compare(*cop, a, b),
                            (AbstractValue::Boolean(a), AbstractValue::Boolean(b)) => {
                                bool_eq_cmp(*cop, *a, *b)
                            }
                            _ => BoolApprox::Empty,
                        };
                        AbstractValue::Boolean(approx)
                    }
                    BinaryOp::And => AbstractValue::Boolean(kleene(&lv).and(kleene(&rv))),
                    BinaryOp::Or => AbstractValue::Boolean(kleene(&lv).or(kleene(&rv))),
                };
                let make = |mode: Inline| match op {
                    BinaryOp::Arith(aop) => SymExpr::Num(NumExpr::Bin(
                        *aop,
                        Box::new(self.num_of(lhs, state, mode)),
                        Box::new(self.num_of(rhs, state, mode)),
                    )),
                    BinaryOp::Cmp(cop) => SymExpr::Bool(BoolExpr::Cmp(
                        *cop,
                        self.num_of(lhs, state, mode),
                        self.num_of(rhs, state, mode),
                    )),
                    BinaryOp::And => SymExpr::Bool(BoolExpr::And(
                        Box::new(self.bool_of(lhs, state, mode)),
                        Box::new(self.bool_of(rhs, state, mode)),
                    )),
                    BinaryOp::Or => SymExpr::Bool(BoolExpr::Or(
                        Box::new(self.bool_of(lhs, state, mode)),
                        Box::new(self.bool_of(rhs, state, mode)),
                    )),
                };
                let exprs = Some((make(Inline::Solver), make(Inline::Display)));
                self.write_var(dst, value, exprs, instr, state);
            }
            InstrKind::UnOp { dst, op, operand } => {
                let ov = self.eval(operand, state);
                let value = match op {
                    UnaryOp::Neg => {
                        let iv = match ov.as_interval() {
                            Some(a) => {
                                let zero = Interval::singleton(0);
                                arith(crate::domain::ArithOp::Sub, &zero, a, false).0
                            }
                            None => Interval::Empty,
                        };
                        AbstractValue::Num(iv)
                    }
                    UnaryOp::Not => AbstractValue::Boolean(kleene(&ov).not()),
                };
                let make = |mode: Inline| match op {
                    UnaryOp::Neg => {
                        SymExpr::Num(NumExpr::Neg(Box::new(self.num_of(operand, state, mode))))
                    }
                    UnaryOp::Not => {
                        SymExpr::Bool(BoolExpr::Not(Box::new(self.bool_of(operand, state, mode))))
                    }
                };
                let exprs = Some((make(Inline::Solver), make(Inline::Display)));
                self.write_var(dst, value, exprs, instr, state);
            }
            InstrKind::IndexRead { dst, cell } | InstrKind::MemberRead { dst, cell } => {
                let value = read_cell(cell, state, self.ir);
                let is_bool = cell.value_ty == MiniSolType::Bool;
                let atom = Atom {
                    name: cell.canonical.clone(),
                    version: state.version_of(&cell.canonical),
                    unsigned: cell.value_ty.is_unsigned(),
                    is_bool,
                };
                let expr = if is_bool {
                    SymExpr::Bool(BoolExpr::Atom(atom))
                } else {
                    SymExpr::Num(NumExpr::Atom(atom))
                };
                self.write_var(dst, value, Some((expr.clone(), expr)), instr, state);
            }
            InstrKind::IndexWrite { cell, src } | InstrKind::MemberWrite { cell, src } => {
                let value = self.eval(src, state);
                self.write_cell(cell, value, state)?;
                state.bump_version(&cell.canonical);
            }
            InstrKind::Condition { cond } => {
                flag_def(state, cond, CondFlag::Condition);
            }
            InstrKind::Require { cond } | InstrKind::Assert { cond } => {
                flag_def(state, cond, CondFlag::AssertRequire);
            }
            InstrKind::Revert
            | InstrKind::Return { .. }
            | InstrKind::BuiltinCall { .. }
            | InstrKind::Nop => {}
        }
        Ok(())
    }

    fn eval(&self, op: &Operand, state: &AbstractState) -> AbstractValue {
        eval(op, state, self.ir)
    }

    /// Symbolic view of an operand. Temporaries always inline their
    /// definition; named variables only in solver mode, and only when the
    /// recorded definition still describes the current version.
    fn num_of(&self, op: &Operand, state: &AbstractState, mode: Inline) -> NumExpr {
        match op {
            Operand::Int(v) => NumExpr::Const(v.clone()),
            Operand::Bool(_) => NumExpr::Const(BigInt::from(0)),
            Operand::Var(name) => {
                let info = &self.ir.vars[name];
                let is_temp = info.origin == Origin::Temporary;
                if is_temp || mode == Inline::Solver {
                    if let Some(def) = state.defs.get(name) {
                        if def.version == state.version_of(name) {
                            let picked = match mode {
                                Inline::Solver => &def.expr,
                                Inline::Display => &def.display,
                            };
                            if let SymExpr::Num(e) = picked {
                                return e.clone();
                            }
                        }
                    }
                }
                NumExpr::Atom(Atom {
                    name: name.clone(),
                    version: state.version_of(name),
                    unsigned: info.ty.is_unsigned(),
                    is_bool: false,
                })
            }
        }
    }

    fn bool_of(&self, op: &Operand, state: &AbstractState, mode: Inline) -> BoolExpr {
        match op {
            Operand::Bool(b) => BoolExpr::Const(*b),
            Operand::Int(_) => BoolExpr::Const(false),
            Operand::Var(name) => {
                let info = &self.ir.vars[name];
                let is_temp = info.origin == Origin::Temporary;
                if is_temp || mode == Inline::Solver {
                    if let Some(def) = state.defs.get(name) {
                        if def.version == state.version_of(name) {
                            let picked = match mode {
                                Inline::Solver => &def.expr,
                                Inline::Display => &def.display,
                            };
                            if let SymExpr::Bool(e) = picked {
                                return e.clone();
                            }
                        }
                    }
                }
                BoolExpr::Atom(Atom {
                    name: name.clone(),
                    version: state.version_of(name),
                    unsigned: false,
                    is_bool: true,
                })
            }
        }
    }

    fn sym_pair(&self, op: &Operand, state: &AbstractState) -> Option<(SymExpr, SymExpr)> {
        match op {
            Operand::Int(v) => {
                let e = SymExpr::Num(NumExpr::Const(v.clone()));
                Some((e.clone(), e))
            }
            Operand::Bool(b) => {
                let e = SymExpr::Bool(BoolExpr::Const(*b));
                Some((e.clone(), e))
            }
            Operand::Var(name) => {
                let is_bool = self.ir.vars[name].ty == MiniSolType::Bool;
                let make = |mode| {
                    if is_bool {
                        SymExpr::Bool(self.bool_of(op, state, mode))
                    } else {
                        SymExpr::Num(self.num_of(op, state, mode))
                    }
                };
                Some((make(Inline::Solver), make(Inline::Display)))
            }
        }
    }

    /// Assignment bookkeeping: store the value, bump the version, record the
    /// definition unless the variable is loop-reassigned, self-referential,
    /// or the inlined form got too large.
    fn write_var(
        &self,
        dst: &str,
        value: AbstractValue,
        exprs: Option<(SymExpr, SymExpr)>,
        instr: &Instr,
        state: &mut AbstractState,
    ) {
        state.values.insert(dst.to_string(), value);
        let version = state.bump_version(dst);
        if self.ir.vars[dst].ty.is_composite() {
            // a whole-composite write invalidates every tracked cell under it
            let index_prefix = format!("{dst}[");
            let member_prefix = format!("{dst}.");
            let cells: Vec<String> = state
                .versions
                .keys()
                .filter(|k| k.starts_with(&index_prefix) || k.starts_with(&member_prefix))
                .cloned()
                .collect();
            for c in cells {
                state.bump_version(&c);
            }
        }
        let ok = |e: &SymExpr| !e.mentions(dst) && e.size() <= MAX_DEF_SIZE;
        match exprs {
            Some((expr, display))
                if !self.no_def.contains(dst) && ok(&expr) && ok(&display) =>
            {
                let text = instr
                    .text
                    .clone()
                    .unwrap_or_else(|| display.to_string());
                state.defs.insert(
                    dst.to_string(),
                    Definition {
                        expr,
                        display,
                        version,
                        text,
                        flag: CondFlag::None,
                    },
                );
            }
            _ => {
                state.defs.remove(dst);
            }
        }
    }

    fn write_cell(
        &self,
        cell: &CellRef,
        value: AbstractValue,
        state: &mut AbstractState,
    ) -> Result<(), AnalysisError> {
        let base_origin = self.ir.vars[&cell.base].origin;
        let root = state
            .values
            .entry(cell.base.clone())
            .or_insert_with(|| default_for(&self.ir.vars[&cell.base].ty, base_origin));
        write_path(root, &cell.path, value)
    }
}

/// Constraint-set side of one CFG edge.
///
/// Branch edges assert the condition temporary with the edge's polarity,
/// loop-body edges assert the loop condition, loop-exit edges add nothing,
/// and the sequential edge out of a require/assert asserts its argument.
/// Back edges strip every constraint that was imposed inside the loop, so
/// constraints only ever flow downward.
pub fn edge_apply(
    edge: (Label, Label, EdgeKind),
    out_state: &AbstractState,
    ir: &FunctionIr,
    cfg: &Cfg,
) -> AbstractState {
    let (src, dst, kind) = edge;
    let mut state = out_state.clone();
    let node = ir.node(src);
    match kind {
        EdgeKind::Seq => {
            if let Some((cond, origin)) = require_or_assert(node) {
                impose(&mut state, &cond, true, origin, (src, dst));
            }
        }
        EdgeKind::BranchTrue => {
            if let Some(cond) = condition_of(node) {
                impose(&mut state, &cond, true, ConstraintOrigin::BranchTrue, (src, dst));
            }
        }
        EdgeKind::BranchFalse => {
            if let Some(cond) = condition_of(node) {
                impose(&mut state, &cond, false, ConstraintOrigin::BranchFalse, (src, dst));
            }
        }
        EdgeKind::LoopBody => {
            if let Some(cond) = condition_of(node) {
                impose(&mut state, &cond, true, ConstraintOrigin::LoopInvariant, (src, dst));
            }
        }
        EdgeKind::LoopExit => {}
        EdgeKind::Back => {
            let members = cfg.loop_members(src, dst);
            state.constraints.retain(|_, c| {
                let (a, b) = c.imposing_edge;
                !(members.contains(&a) && members.contains(&b))
            });
        }
    }
    state
}

fn condition_of(node: &IrNode) -> Option<String> {
    node.instrs.iter().rev().find_map(|i| match &i.kind {
        InstrKind::Condition { cond } => Some(cond.clone()),
        _ => None,
    })
}

fn require_or_assert(node: &IrNode) -> Option<(String, ConstraintOrigin)> {
    node.instrs.iter().rev().find_map(|i| match &i.kind {
        InstrKind::Require { cond } => Some((cond.clone(), ConstraintOrigin::Require)),
        InstrKind::Assert { cond } => Some((cond.clone(), ConstraintOrigin::Assert)),
        _ => None,
    })
}

fn impose(
    state: &mut AbstractState,
    symbol: &str,
    polarity: bool,
    origin: ConstraintOrigin,
    imposing_edge: (Label, Label),
) {
    let (expr, display, text) = match state.defs.get(symbol) {
        Some(def) => {
            let pick = |e: &SymExpr| match e {
                SymExpr::Bool(b) => b.clone(),
                SymExpr::Num(_) => BoolExpr::Atom(bool_atom(symbol, state)),
            };
            (pick(&def.expr), pick(&def.display), def.text.clone())
        }
        None => {
            let a = BoolExpr::Atom(bool_atom(symbol, state));
            (a.clone(), a, symbol.to_string())
        }
    };
    let c = Constraint {
        symbol: symbol.to_string(),
        symbol_version: state.version_of(symbol),
        polarity,
        expr,
        display,
        text,
        origin,
        imposing_edge,
    };
    state.constraints.insert(c.key(), c);
}

fn bool_atom(name: &str, state: &AbstractState) -> Atom {
    Atom {
        name: name.to_string(),
        version: state.version_of(name),
        unsigned: false,
        is_bool: true,
    }
}

// -- shared helpers -----------------------------------------------------------

fn kleene(v: &AbstractValue) -> BoolApprox {
    v.as_bool().unwrap_or(BoolApprox::Empty)
}

fn flag_def(state: &mut AbstractState, symbol: &str, flag: CondFlag) {
    if let Some(def) = state.defs.get_mut(symbol) {
        if def.flag < flag {
            def.flag = flag;
        }
    }
}

fn bool_eq_cmp(op: crate::domain::CmpOp, a: BoolApprox, b: BoolApprox) -> BoolApprox {
    use crate::domain::CmpOp;
    let eq = match (a, b) {
        (BoolApprox::Empty, _) | (_, BoolApprox::Empty) => BoolApprox::Empty,
        (BoolApprox::MustTrue, BoolApprox::MustTrue)
        | (BoolApprox::MustFalse, BoolApprox::MustFalse) => BoolApprox::MustTrue,
        (BoolApprox::MustTrue, BoolApprox::MustFalse)
        | (BoolApprox::MustFalse, BoolApprox::MustTrue) => BoolApprox::MustFalse,
        _ => BoolApprox::Unknown,
    };
    match op {
        CmpOp::Eq => eq,
        CmpOp::Ne => eq.not(),
        _ => BoolApprox::Unknown,
    }
}

pub fn eval(op: &Operand, state: &AbstractState, ir: &FunctionIr) -> AbstractValue {
    match op {
        Operand::Int(v) => AbstractValue::Num(Interval::singleton(v.clone())),
        Operand::Bool(b) => AbstractValue::Boolean(BoolApprox::from_bool(*b)),
        Operand::Var(name) => match state.value(name) {
            Some(v) => v.clone(),
            None => AbstractValue::bottom_for(&ir.vars[name].ty),
        },
    }
}

fn zero_value(ty: &MiniSolType) -> AbstractValue {
    match ty {
        MiniSolType::Bool => AbstractValue::Boolean(BoolApprox::MustFalse),
        MiniSolType::Struct { fields, .. } => {
            let mut comp = CompositeValue::new(ty.clone());
            for (name, fty) in fields {
                comp.set(CellKey::Field(name.clone()), zero_value(fty));
            }
            AbstractValue::Comp(comp)
        }
        MiniSolType::Array { elem, len: Some(n) } => {
            let mut comp = CompositeValue::new(ty.clone());
            for i in 0..*n {
                comp.set(CellKey::Index(i.into()), zero_value(elem));
            }
            AbstractValue::Comp(comp)
        }
        MiniSolType::Array { .. } | MiniSolType::Mapping { .. } => {
            AbstractValue::Comp(CompositeValue::new(ty.clone()))
        }
        _ => AbstractValue::Num(Interval::singleton(0)),
    }
}

/// Reads through a cell path; an absent key yields the element default.
/// Reads never materialize keys.
pub fn read_cell(cell: &CellRef, state: &AbstractState, ir: &FunctionIr) -> AbstractValue {
    let base_origin = ir.vars[&cell.base].origin;
    let mut cur = match state.value(&cell.base) {
        Some(v) => v.clone(),
        None => default_for(&ir.vars[&cell.base].ty, base_origin),
    };
    for key in &cell.path {
        cur = match cur {
            AbstractValue::Comp(comp) => match comp.get(key) {
                Some(v) => v.clone(),
                None => {
                    let vt = comp
                        .value_type(key)
                        .cloned()
                        .unwrap_or_else(|| cell.value_ty.clone());
                    default_for(&vt, Origin::State)
                }
            },
            other => return other,
        };
    }
    cur
}

fn write_path(
    target: &mut AbstractValue,
    path: &[CellKey],
    value: AbstractValue,
) -> Result<(), AnalysisError> {
    let Some((key, rest)) = path.split_first() else {
        *target = value;
        return Ok(());
    };
    match target {
        AbstractValue::Comp(comp) => {
            if rest.is_empty() {
                comp.set(key.clone(), value);
                Ok(())
            } else {
                let vt = comp.value_type(key).cloned();
                let mut inner = match comp.get(key) {
                    Some(v) => v.clone(),
                    None => match vt {
                        Some(t) => default_for(&t, Origin::State),
                        None => {
                            return Err(AnalysisError::Unsupported(
                                "write through an untyped cell".into(),
                            ))
                        }
                    },
                };
                write_path(&mut inner, rest, value)?;
                comp.set(key.clone(), inner);
                Ok(())
            }
        }
        _ => Err(AnalysisError::Unsupported(
            "cell write into a scalar value".into(),
        )),
    }
}
