//! SMT-LIB2 rendering of a satisfiability query.
//!
//! Output is byte-stable for equal queries: declarations, bounds and
//! assertions are emitted in the query's (sorted) order. Unsigned integer
//! declarations carry their nonnegativity as a sort fact; infinite bounds
//! are encoded by omission. Division and modulo map to `div`/`mod`, which
//! agree with the source semantics on the nonnegative operands the
//! analysis produces.

use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::analysis::expr::{BoolExpr, NumExpr};
use crate::domain::{ArithOp, CmpOp, ExtInt};
use crate::solver::query::{SatQuery, Sort};

pub fn emit_smtlib(q: &SatQuery) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_NIA)\n");
    for d in &q.decls {
        match d.sort {
            Sort::Int { unsigned } => {
                let _ = writeln!(out, "(declare-const {} Int)", symbol(&d.name));
                if unsigned {
                    let _ = writeln!(out, "(assert (>= {} 0))", symbol(&d.name));
                }
            }
            Sort::Bool => {
                let _ = writeln!(out, "(declare-const {} Bool)", symbol(&d.name));
            }
        }
    }
    for (name, iv) in &q.bounds {
        if let Some((lo, hi)) = iv.bounds() {
            if let ExtInt::Finite(v) = lo {
                let _ = writeln!(out, "(assert (>= {} {}))", symbol(name), literal(v));
            }
            if let ExtInt::Finite(v) = hi {
                let _ = writeln!(out, "(assert (<= {} {}))", symbol(name), literal(v));
            }
        }
    }
    for (sym, polarity) in &q.asserts {
        let def = q
            .defs
            .iter()
            .find(|(s, _)| s == sym)
            .map(|(_, e)| e.clone())
            .unwrap_or(BoolExpr::Const(true));
        let body = bool_term(&def);
        if *polarity {
            let _ = writeln!(out, "(assert {body})");
        } else {
            let _ = writeln!(out, "(assert (not {body}))");
        }
    }
    out.push_str("(check-sat)\n");
    out
}

/// Quote anything that is not a plain identifier.
fn symbol(name: &str) -> String {
    let plain = name
        .chars()
        .enumerate()
        .all(|(i, c)| c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit()));
    if plain {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn literal(v: &BigInt) -> String {
    if v.is_negative() {
        format!("(- {})", v.magnitude())
    } else {
        v.to_string()
    }
}

fn num_term(e: &NumExpr) -> String {
    match e {
        NumExpr::Const(v) => literal(v),
        NumExpr::Atom(a) => symbol(&a.name),
        NumExpr::Neg(a) => format!("(- {})", num_term(a)),
        NumExpr::Bin(op, a, b) => {
            let sym = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
                ArithOp::Div => "div",
                ArithOp::Mod => "mod",
            };
            format!("({sym} {} {})", num_term(a), num_term(b))
        }
    }
}

fn bool_term(e: &BoolExpr) -> String {
    match e {
        BoolExpr::Const(true) => "true".to_string(),
        BoolExpr::Const(false) => "false".to_string(),
        BoolExpr::Atom(a) => symbol(&a.name),
        BoolExpr::Cmp(op, a, b) => {
            let sym = match op {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
            };
            format!("({sym} {} {})", num_term(a), num_term(b))
        }
        BoolExpr::Not(a) => format!("(not {})", bool_term(a)),
        BoolExpr::And(a, b) => format!("(and {} {})", bool_term(a), bool_term(b)),
        BoolExpr::Or(a, b) => format!("(or {} {})", bool_term(a), bool_term(b)),
    }
}
