//! Symbolic expressions recorded for temporaries and locals.
//!
//! A definition is a fully inlined expression over *input atoms*:
//! parameters, state variables, builtins and composite cells. Each atom is
//! pinned to the assignment version that was current when the definition
//! was recorded, so a constraint keeps meaning the value it was imposed on
//! even after the variable is reassigned.

use std::fmt;

use num_bigint::BigInt;

use crate::domain::{ArithOp, CmpOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub version: u32,
    pub unsigned: bool,
    pub is_bool: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumExpr {
    Const(BigInt),
    Atom(Atom),
    Bin(ArithOp, Box<NumExpr>, Box<NumExpr>),
    Neg(Box<NumExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Atom(Atom),
    Cmp(CmpOp, NumExpr, NumExpr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymExpr {
    Num(NumExpr),
    Bool(BoolExpr),
}

/// Condition markers on boolean values, mirroring how conditions and
/// require/assert arguments are tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CondFlag {
    None,
    Condition,
    AssertRequire,
}

impl CondFlag {
    pub fn display(self) -> Option<&'static str> {
        match self {
            CondFlag::None => None,
            CondFlag::Condition => Some("condition"),
            CondFlag::AssertRequire => Some("assert/require"),
        }
    }
}

/// Recorded definition of a variable version.
///
/// `expr` is the solver view with every inlinable definition substituted;
/// `display` inlines temporaries only, keeping source-level variable names
/// for constraint rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub expr: SymExpr,
    pub display: SymExpr,
    /// Version of the defined variable this definition describes.
    pub version: u32,
    /// Source spelling, for reports.
    pub text: String,
    pub flag: CondFlag,
}

impl NumExpr {
    pub fn size(&self) -> usize {
        match self {
            NumExpr::Const(_) | NumExpr::Atom(_) => 1,
            NumExpr::Bin(_, a, b) => 1 + a.size() + b.size(),
            NumExpr::Neg(a) => 1 + a.size(),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            NumExpr::Const(_) => false,
            NumExpr::Atom(a) => a.name == name,
            NumExpr::Bin(_, a, b) => a.mentions(name) || b.mentions(name),
            NumExpr::Neg(a) => a.mentions(name),
        }
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            NumExpr::Const(_) => {}
            NumExpr::Atom(a) => f(a),
            NumExpr::Bin(_, a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            NumExpr::Neg(a) => a.visit_atoms(f),
        }
    }

    fn eq_modulo_versions(&self, other: &NumExpr) -> bool {
        match (self, other) {
            (NumExpr::Const(a), NumExpr::Const(b)) => a == b,
            (NumExpr::Atom(a), NumExpr::Atom(b)) => a.name == b.name,
            (NumExpr::Bin(o1, a1, b1), NumExpr::Bin(o2, a2, b2)) => {
                o1 == o2 && a1.eq_modulo_versions(a2) && b1.eq_modulo_versions(b2)
            }
            (NumExpr::Neg(a), NumExpr::Neg(b)) => a.eq_modulo_versions(b),
            _ => false,
        }
    }

    fn merge_versions(&mut self, other: &NumExpr) {
        match (self, other) {
            (NumExpr::Atom(a), NumExpr::Atom(b)) => a.version = a.version.max(b.version),
            (NumExpr::Bin(_, a1, b1), NumExpr::Bin(_, a2, b2)) => {
                a1.merge_versions(a2);
                b1.merge_versions(b2);
            }
            (NumExpr::Neg(a), NumExpr::Neg(b)) => a.merge_versions(b),
            _ => {}
        }
    }

    /// Compact rendering used for constraint texts: `index%2`, `x+1`.
    pub fn render(&self) -> String {
        self.render_prec(0)
    }

    fn render_prec(&self, parent: u8) -> String {
        match self {
            NumExpr::Const(v) => v.to_string(),
            NumExpr::Atom(a) => a.name.clone(),
            NumExpr::Neg(a) => format!("-{}", a.render_prec(3)),
            NumExpr::Bin(op, a, b) => {
                let p = match op {
                    ArithOp::Add | ArithOp::Sub => 1,
                    _ => 2,
                };
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "/",
                    ArithOp::Mod => "%",
                };
                let text = format!("{}{}{}", a.render_prec(p), sym, b.render_prec(p + 1));
                if p < parent {
                    format!("({text})")
                } else {
                    text
                }
            }
        }
    }
}

impl BoolExpr {
    pub fn size(&self) -> usize {
        match self {
            BoolExpr::Const(_) | BoolExpr::Atom(_) => 1,
            BoolExpr::Cmp(_, a, b) => 1 + a.size() + b.size(),
            BoolExpr::Not(a) => 1 + a.size(),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            BoolExpr::Const(_) => false,
            BoolExpr::Atom(a) => a.name == name,
            BoolExpr::Cmp(_, a, b) => a.mentions(name) || b.mentions(name),
            BoolExpr::Not(a) => a.mentions(name),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => a.mentions(name) || b.mentions(name),
        }
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Atom(a) => f(a),
            BoolExpr::Cmp(_, a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            BoolExpr::Not(a) => a.visit_atoms(f),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    pub fn eq_modulo_versions(&self, other: &BoolExpr) -> bool {
        match (self, other) {
            (BoolExpr::Const(a), BoolExpr::Const(b)) => a == b,
            (BoolExpr::Atom(a), BoolExpr::Atom(b)) => a.name == b.name,
            (BoolExpr::Cmp(o1, a1, b1), BoolExpr::Cmp(o2, a2, b2)) => {
                o1 == o2 && a1.eq_modulo_versions(a2) && b1.eq_modulo_versions(b2)
            }
            (BoolExpr::Not(a), BoolExpr::Not(b)) => a.eq_modulo_versions(b),
            (BoolExpr::And(a1, b1), BoolExpr::And(a2, b2))
            | (BoolExpr::Or(a1, b1), BoolExpr::Or(a2, b2)) => {
                a1.eq_modulo_versions(a2) && b1.eq_modulo_versions(b2)
            }
            _ => false,
        }
    }

    pub fn merge_versions(&mut self, other: &BoolExpr) {
        match (self, other) {
            (BoolExpr::Atom(a), BoolExpr::Atom(b)) => a.version = a.version.max(b.version),
            (BoolExpr::Cmp(_, a1, b1), BoolExpr::Cmp(_, a2, b2)) => {
                a1.merge_versions(a2);
                b1.merge_versions(b2);
            }
            (BoolExpr::Not(a), BoolExpr::Not(b)) => a.merge_versions(b),
            (BoolExpr::And(a1, b1), BoolExpr::And(a2, b2))
            | (BoolExpr::Or(a1, b1), BoolExpr::Or(a2, b2)) => {
                a1.merge_versions(a2);
                b1.merge_versions(b2);
            }
            _ => {}
        }
    }

    /// Compact rendering with a polarity applied: a negated comparison flips
    /// its operator, so `(index%2==0, false)` renders as `index%2!=0`.
    pub fn render_with_polarity(&self, polarity: bool) -> String {
        match (self, polarity) {
            (_, true) => self.render(),
            (BoolExpr::Cmp(op, a, b), false) => {
                format!("{}{}{}", a.render(), op.negate().symbol(), b.render())
            }
            (BoolExpr::Not(inner), false) => inner.render(),
            (BoolExpr::Const(v), false) => (!v).to_string(),
            (other, false) => format!("!({})", other.render()),
        }
    }

    pub fn render(&self) -> String {
        match self {
            BoolExpr::Const(v) => v.to_string(),
            BoolExpr::Atom(a) => a.name.clone(),
            BoolExpr::Cmp(op, a, b) => format!("{}{}{}", a.render(), op.symbol(), b.render()),
            BoolExpr::Not(a) => format!("!({})", a.render()),
            BoolExpr::And(a, b) => format!("{} && {}", a.render(), b.render()),
            BoolExpr::Or(a, b) => format!("{} || {}", a.render(), b.render()),
        }
    }
}

impl SymExpr {
    pub fn size(&self) -> usize {
        match self {
            SymExpr::Num(e) => e.size(),
            SymExpr::Bool(e) => e.size(),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            SymExpr::Num(e) => e.mentions(name),
            SymExpr::Bool(e) => e.mentions(name),
        }
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            SymExpr::Num(e) => e.visit_atoms(f),
            SymExpr::Bool(e) => e.visit_atoms(f),
        }
    }

    pub fn eq_modulo_versions(&self, other: &SymExpr) -> bool {
        match (self, other) {
            (SymExpr::Num(a), SymExpr::Num(b)) => a.eq_modulo_versions(b),
            (SymExpr::Bool(a), SymExpr::Bool(b)) => a.eq_modulo_versions(b),
            _ => false,
        }
    }

    pub fn merge_versions(&mut self, other: &SymExpr) {
        match (self, other) {
            (SymExpr::Num(a), SymExpr::Num(b)) => a.merge_versions(b),
            (SymExpr::Bool(a), SymExpr::Bool(b)) => a.merge_versions(b),
            _ => {}
        }
    }
}

impl Definition {
    /// Definitions are comparable across worklist passes when their shape,
    /// text and flag agree; atom versions are bookkeeping, not state.
    pub fn eq_modulo_versions(&self, other: &Definition) -> bool {
        self.flag == other.flag
            && self.text == other.text
            && self.expr.eq_modulo_versions(&other.expr)
            && self.display.eq_modulo_versions(&other.display)
    }

    pub fn merge_versions(&mut self, other: &Definition) {
        self.expr.merge_versions(&other.expr);
        self.display.merge_versions(&other.display);
        self.version = self.version.max(other.version);
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymExpr::Num(e) => write!(f, "{}", e.render()),
            SymExpr::Bool(e) => write!(f, "{}", e.render()),
        }
    }
}
