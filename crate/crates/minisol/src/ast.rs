//! Typed AST for the MiniSol subset: contracts, functions, statements and
//! expressions, plus the type grammar shared with the abstract domain.

use std::fmt;

use num_bigint::BigInt;

use crate::domain::interval::{ArithOp, CmpOp};
use crate::source::Span;

/// The closed type grammar. `uint`/`int` default to 256 bits; bit width is
/// recorded but value analysis treats integers as unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MiniSolType {
    UInt(u16),
    Int(u16),
    Bool,
    Address,
    /// Struct reference; `fields` is empty until the type checker resolves
    /// the declaration.
    Struct {
        name: String,
        fields: Vec<(String, MiniSolType)>,
    },
    Array {
        elem: Box<MiniSolType>,
        len: Option<u64>,
    },
    Mapping {
        key: Box<MiniSolType>,
        value: Box<MiniSolType>,
    },
}

impl MiniSolType {
    pub fn uint() -> MiniSolType {
        MiniSolType::UInt(256)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            MiniSolType::UInt(_) | MiniSolType::Int(_) | MiniSolType::Address
        )
    }

    pub fn is_unsigned(&self) -> bool {
        matches!(self, MiniSolType::UInt(_) | MiniSolType::Address)
    }

    pub fn is_composite(&self) -> bool {
        matches!(
            self,
            MiniSolType::Struct { .. } | MiniSolType::Array { .. } | MiniSolType::Mapping { .. }
        )
    }

    /// Type name as printed in reports (`uint`, `bool`, `uint[3]`, ...).
    pub fn display_name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MiniSolType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MiniSolType::UInt(256) => write!(f, "uint"),
            MiniSolType::UInt(b) => write!(f, "uint{b}"),
            MiniSolType::Int(256) => write!(f, "int"),
            MiniSolType::Int(b) => write!(f, "int{b}"),
            MiniSolType::Bool => write!(f, "bool"),
            MiniSolType::Address => write!(f, "address"),
            MiniSolType::Struct { name, .. } => write!(f, "{name}"),
            MiniSolType::Array { elem, len: Some(n) } => write!(f, "{elem}[{n}]"),
            MiniSolType::Array { elem, len: None } => write!(f, "{elem}[]"),
            MiniSolType::Mapping { key, value } => write!(f, "mapping({key}=>{value})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Arith(ArithOp),
    Cmp(CmpOp),
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Arith(ArithOp::Add) => "+",
            BinaryOp::Arith(ArithOp::Sub) => "-",
            BinaryOp::Arith(ArithOp::Mul) => "*",
            BinaryOp::Arith(ArithOp::Div) => "/",
            BinaryOp::Arith(ArithOp::Mod) => "%",
            BinaryOp::Cmp(c) => c.symbol(),
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub line: u32,
    pub span: Span,
    /// Filled by the type checker.
    pub ty: Option<MiniSolType>,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Ident(String),
    Int(BigInt),
    Bool(bool),
    Str(String),
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Member {
        base: Box<Expr>,
        field: String,
    },
    /// `payable(expr)` — an address cast, identity for the analysis.
    PayableCast(Box<Expr>),
}

impl Expr {
    pub fn source_text<'a>(&self, source: &'a str) -> &'a str {
        self.span.slice(source)
    }

    /// Compact canonical spelling, used to name composite cells.
    pub fn canonical(&self) -> String {
        match &self.kind {
            ExprKind::Ident(n) => n.clone(),
            ExprKind::Int(v) => v.to_string(),
            ExprKind::Bool(b) => b.to_string(),
            ExprKind::Str(s) => format!("\"{s}\""),
            ExprKind::Binary { op, lhs, rhs } => {
                format!("{}{}{}", lhs.canonical(), op.symbol(), rhs.canonical())
            }
            ExprKind::Unary { op, operand } => {
                let s = match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::Not => "!",
                };
                format!("{s}{}", operand.canonical())
            }
            ExprKind::Index { base, index } => {
                format!("{}[{}]", base.canonical(), index.canonical())
            }
            ExprKind::Member { base, field } => format!("{}.{field}", base.canonical()),
            ExprKind::PayableCast(e) => format!("payable({})", e.canonical()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Private,
    Internal,
    External,
    Default,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutability {
    Pure,
    View,
    Payable,
    Default,
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
    /// Span of the statement header (through the condition for `if`/`while`,
    /// the whole statement otherwise), used for report text.
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    VarDecl {
        ty: MiniSolType,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    For {
        init: Box<Stmt>,
        cond: Expr,
        step: Box<Stmt>,
        body: Vec<Stmt>,
    },
    Require(Expr),
    Assert(Expr),
    Revert(Option<String>),
    Return(Option<Expr>),
    /// `target.name(args)` for the supported address builtins
    /// (`transfer`, `send`, `call`).
    Builtin {
        target: Expr,
        name: String,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub ty: MiniSolType,
    pub line: u32,
}

#[derive(Clone, Debug)]
pub struct FunctionAst {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Option<MiniSolType>,
    pub visibility: Visibility,
    pub mutability: Mutability,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Clone, Debug)]
pub struct StateVar {
    pub name: String,
    pub ty: MiniSolType,
    pub visibility: Visibility,
    pub line: u32,
}

#[derive(Clone, Debug)]
pub struct StructDef {
    pub name: String,
    pub fields: Vec<(String, MiniSolType)>,
    pub line: u32,
}

#[derive(Clone, Debug)]
pub struct ContractAst {
    pub name: String,
    pub pragma: Option<String>,
    pub structs: Vec<StructDef>,
    pub state_vars: Vec<StateVar>,
    pub functions: Vec<FunctionAst>,
    pub line: u32,
}

impl ContractAst {
    pub fn function(&self, name: &str) -> Option<&FunctionAst> {
        self.functions.iter().find(|f| f.name == name)
    }
}

// ---------------------------------------------------------------------------
// Pretty printer. The output reparses to a structurally identical program.
// ---------------------------------------------------------------------------

pub fn pretty_print(c: &ContractAst) -> String {
    let mut out = String::new();
    if let Some(p) = &c.pragma {
        out.push_str(&format!("pragma {p};\n"));
    }
    out.push_str(&format!("contract {} {{\n", c.name));
    for s in &c.structs {
        out.push_str(&format!("    struct {} {{\n", s.name));
        for (name, ty) in &s.fields {
            out.push_str(&format!("        {ty} {name};\n"));
        }
        out.push_str("    }\n");
    }
    for v in &c.state_vars {
        let vis = vis_str(v.visibility);
        out.push_str(&format!("    {}{}{};\n", v.ty, vis, format!(" {}", v.name)));
    }
    for f in &c.functions {
        out.push_str(&pretty_function(f));
    }
    out.push_str("}\n");
    out
}

fn vis_str(v: Visibility) -> &'static str {
    match v {
        Visibility::Public => " public",
        Visibility::Private => " private",
        Visibility::Internal => " internal",
        Visibility::External => " external",
        Visibility::Default => "",
    }
}

fn mut_str(m: Mutability) -> &'static str {
    match m {
        Mutability::Pure => " pure",
        Mutability::View => " view",
        Mutability::Payable => " payable",
        Mutability::Default => "",
    }
}

fn pretty_function(f: &FunctionAst) -> String {
    let params: Vec<String> = f.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    let mut head = format!("    function {}({})", f.name, params.join(", "));
    head.push_str(vis_str(f.visibility));
    head.push_str(mut_str(f.mutability));
    if let Some(r) = &f.returns {
        head.push_str(&format!(" returns({r})"));
    }
    head.push_str(" {\n");
    let mut out = head;
    for s in &f.body {
        pretty_stmt(s, 2, &mut out);
    }
    out.push_str("    }\n");
    out
}

fn indent(n: usize, out: &mut String) {
    for _ in 0..n {
        out.push_str("    ");
    }
}

fn pretty_stmt(s: &Stmt, depth: usize, out: &mut String) {
    indent(depth, out);
    match &s.kind {
        StmtKind::VarDecl { ty, name, init } => {
            out.push_str(&format!("{ty} {name}"));
            if let Some(e) = init {
                out.push_str(&format!(" = {}", pretty_expr(e)));
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            out.push_str(&format!("{} = {};\n", pretty_expr(target), pretty_expr(value)));
        }
        StmtKind::If { cond, then_body, else_body } => {
            out.push_str(&format!("if ({}) {{\n", pretty_expr(cond)));
            for st in then_body {
                pretty_stmt(st, depth + 1, out);
            }
            indent(depth, out);
            out.push('}');
            if let Some(eb) = else_body {
                out.push_str(" else {\n");
                for st in eb {
                    pretty_stmt(st, depth + 1, out);
                }
                indent(depth, out);
                out.push('}');
            }
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            out.push_str(&format!("while ({}) {{\n", pretty_expr(cond)));
            for st in body {
                pretty_stmt(st, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("}\n");
        }
        StmtKind::For { init, cond, step, body } => {
            let mut init_s = String::new();
            pretty_stmt(init, 0, &mut init_s);
            let mut step_s = String::new();
            pretty_stmt(step, 0, &mut step_s);
            out.push_str(&format!(
                "for ({} {}; {}) {{\n",
                init_s.trim_end_matches('\n').trim_end_matches(';'),
                format!("; {}", pretty_expr(cond)),
                step_s.trim().trim_end_matches(';'),
            ));
            for st in body {
                pretty_stmt(st, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("}\n");
        }
        StmtKind::Require(e) => out.push_str(&format!("require({});\n", pretty_expr(e))),
        StmtKind::Assert(e) => out.push_str(&format!("assert({});\n", pretty_expr(e))),
        StmtKind::Revert(msg) => match msg {
            Some(m) => out.push_str(&format!("revert(\"{m}\");\n")),
            None => out.push_str("revert();\n"),
        },
        StmtKind::Return(e) => match e {
            Some(e) => out.push_str(&format!("return {};\n", pretty_expr(e))),
            None => out.push_str("return;\n"),
        },
        StmtKind::Builtin { target, name, args } => {
            let args: Vec<String> = args.iter().map(pretty_expr).collect();
            out.push_str(&format!("{}.{name}({});\n", pretty_expr(target), args.join(", ")));
        }
    }
}

fn prec(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => 1,
        BinaryOp::And => 2,
        BinaryOp::Cmp(_) => 3,
        BinaryOp::Arith(ArithOp::Add) | BinaryOp::Arith(ArithOp::Sub) => 4,
        _ => 5,
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    pretty_expr_prec(e, 0)
}

fn pretty_expr_prec(e: &Expr, parent: u8) -> String {
    match &e.kind {
        ExprKind::Ident(n) => n.clone(),
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Str(s) => format!("\"{s}\""),
        ExprKind::Binary { op, lhs, rhs } => {
            let p = prec(*op);
            let text = format!(
                "{} {} {}",
                pretty_expr_prec(lhs, p),
                op.symbol(),
                pretty_expr_prec(rhs, p + 1)
            );
            if p < parent {
                format!("({text})")
            } else {
                text
            }
        }
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnaryOp::Neg => "-",
                UnaryOp::Not => "!",
            };
            format!("{sym}{}", pretty_expr_prec(operand, 6))
        }
        ExprKind::Index { base, index } => {
            format!("{}[{}]", pretty_expr_prec(base, 6), pretty_expr(index))
        }
        ExprKind::Member { base, field } => format!("{}.{field}", pretty_expr_prec(base, 6)),
        ExprKind::PayableCast(inner) => format!("payable({})", pretty_expr(inner)),
    }
}
