//! Solver-neutral encoding of a node's analysis information.
//!
//! Assembly order follows the constraint-checking flow: collect the numeric
//! variables referenced by flagged boolean expressions, collect those
//! expressions, declare the numerics, add interval bounds only where the
//! interval differs from the type default, then add the boolean definitions
//! and their polarity assertions. Composite cells are declared as fresh
//! scalar symbols named by the canonical cell text. An atom pinned to a
//! superseded version gets a `@v` suffix and no interval bound beyond its
//! sort.

use std::collections::BTreeMap;

use crate::analysis::expr::{Atom, BoolExpr, NumExpr};
use crate::analysis::AbstractState;
use crate::domain::{AbstractValue, Interval};
use crate::ir::FunctionIr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("expression not encodable: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    /// Integer; unsigned adds a nonnegativity fact at declaration.
    Int { unsigned: bool },
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

/// A satisfiability query over scalar integer and boolean symbols.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SatQuery {
    pub decls: Vec<Decl>,
    /// Interval bounds for declared integers, beyond their sort.
    pub bounds: Vec<(String, Interval)>,
    /// Defining expression per asserted boolean symbol, atom names resolved.
    pub defs: Vec<(String, BoolExpr)>,
    /// Polarity assertions, `('TMP_3', true)`.
    pub asserts: Vec<(String, bool)>,
}

impl SatQuery {
    pub fn is_trivial(&self) -> bool {
        self.asserts.is_empty()
    }
}

pub fn encode_state(state: &AbstractState, ir: &FunctionIr) -> Result<SatQuery, EncodeError> {
    let mut atoms: BTreeMap<String, Atom> = BTreeMap::new();
    let mut defs: Vec<(String, BoolExpr)> = Vec::new();
    let mut asserts: Vec<(String, bool)> = Vec::new();

    for c in state.constraints.values() {
        let resolved = resolve_bool(&c.expr, state, &mut atoms);
        if !defs.iter().any(|(s, _)| *s == c.symbol) {
            defs.push((c.symbol.clone(), resolved));
        }
        asserts.push((c.symbol.clone(), c.polarity));
    }
    defs.sort_by(|a, b| a.0.cmp(&b.0));
    asserts.sort();

    let mut decls = Vec::new();
    let mut bounds = Vec::new();
    for (resolved_name, atom) in &atoms {
        let sort = if atom.is_bool {
            Sort::Bool
        } else {
            Sort::Int {
                unsigned: atom.unsigned,
            }
        };
        decls.push(Decl {
            name: resolved_name.clone(),
            sort,
        });
        if atom.is_bool {
            continue;
        }
        // bounds only for atoms still at their current version
        if *resolved_name != atom.name {
            continue;
        }
        if let Some(interval) = current_interval(&atom.name, state, ir) {
            let type_default = type_default_interval(&atom.name, ir);
            if interval != type_default && !interval.is_empty() {
                bounds.push((resolved_name.clone(), interval));
            }
        }
    }

    Ok(SatQuery {
        decls,
        bounds,
        defs,
        asserts,
    })
}

/// Interval currently associated with an atom name: a plain variable's
/// value, or a composite cell's content looked up through the cell index.
pub fn current_interval(name: &str, state: &AbstractState, ir: &FunctionIr) -> Option<Interval> {
    if let Some(AbstractValue::Num(iv)) = state.value(name) {
        return Some(iv.clone());
    }
    if let Some(cell) = ir.cells.get(name) {
        if let AbstractValue::Num(iv) = crate::analysis::read_cell(cell, state, ir) {
            return Some(iv);
        }
    }
    None
}

/// The default interval for the atom's declared type (not its origin):
/// unsigned types default to [0, inf), signed ones to the full line.
pub fn type_default_interval(name: &str, ir: &FunctionIr) -> Interval {
    let unsigned = ir
        .vars
        .get(name)
        .map(|v| v.ty.is_unsigned())
        .or_else(|| ir.cells.get(name).map(|c| c.value_ty.is_unsigned()))
        .unwrap_or(true);
    if unsigned {
        Interval::unsigned_top()
    } else {
        Interval::top()
    }
}

fn resolve_atom(atom: &Atom, state: &AbstractState, out: &mut BTreeMap<String, Atom>) -> Atom {
    let current = state.version_of(&atom.name);
    let resolved_name = if atom.version == current {
        atom.name.clone()
    } else {
        format!("{}@{}", atom.name, atom.version)
    };
    out.entry(resolved_name.clone()).or_insert_with(|| atom.clone());
    Atom {
        name: resolved_name,
        version: 0,
        unsigned: atom.unsigned,
        is_bool: atom.is_bool,
    }
}

fn resolve_num(e: &NumExpr, state: &AbstractState, out: &mut BTreeMap<String, Atom>) -> NumExpr {
    match e {
        NumExpr::Const(v) => NumExpr::Const(v.clone()),
        NumExpr::Atom(a) => NumExpr::Atom(resolve_atom(a, state, out)),
        NumExpr::Bin(op, a, b) => NumExpr::Bin(
            *op,
            Box::new(resolve_num(a, state, out)),
            Box::new(resolve_num(b, state, out)),
        ),
        NumExpr::Neg(a) => NumExpr::Neg(Box::new(resolve_num(a, state, out))),
    }
}

fn resolve_bool(e: &BoolExpr, state: &AbstractState, out: &mut BTreeMap<String, Atom>) -> BoolExpr {
    match e {
        BoolExpr::Const(v) => BoolExpr::Const(*v),
        BoolExpr::Atom(a) => BoolExpr::Atom(resolve_atom(a, state, out)),
        BoolExpr::Cmp(op, a, b) => {
            BoolExpr::Cmp(*op, resolve_num(a, state, out), resolve_num(b, state, out))
        }
        BoolExpr::Not(a) => BoolExpr::Not(Box::new(resolve_bool(a, state, out))),
        BoolExpr::And(a, b) => BoolExpr::And(
            Box::new(resolve_bool(a, state, out)),
            Box::new(resolve_bool(b, state, out)),
        ),
        BoolExpr::Or(a, b) => BoolExpr::Or(
            Box::new(resolve_bool(a, state, out)),
            Box::new(resolve_bool(b, state, out)),
        ),
    }
}

