//! Lowering from the typed AST to a three-address IR.
//!
//! One labeled node per source statement, labels numbered in source order
//! from 1. Every condition is first computed into a temporary and then
//! consumed by a CONDITION/REQUIRE/ASSERT instruction. Temporary numbering
//! is contract-wide: binary/unary operations and casts take `TMP_k` names,
//! composite cell reads take `REF_k` names, and every builtin call
//! (require, assert, revert, transfer, send, call) burns one `TMP` number
//! for its void result.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::ast::*;
use crate::cfg::EdgeKind;
use crate::domain::{CellKey, Origin};
use crate::types::builtin_name;

pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lowering error at line {line}: {message}")]
pub struct LoweringError {
    pub line: u32,
    pub message: String,
}

fn lerr(line: u32, message: impl Into<String>) -> LoweringError {
    LoweringError {
        line,
        message: message.into(),
    }
}

/// Reference to a composite cell: a named composite plus a key path.
/// `canonical` is the compact spelling shared by state output and solver
/// symbols, e.g. `deposits[msg.sender]` or `top.amount`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRef {
    pub base: String,
    pub path: Vec<CellKey>,
    /// Subscript operand per path element; `None` for struct fields.
    /// Constant indexes carry their literal, summary keys the lowered key
    /// expression, so bounds checks can evaluate the index interval.
    pub subs: Vec<Option<Operand>>,
    pub canonical: String,
    pub value_ty: MiniSolType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Int(BigInt),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstrKind {
    Assign {
        dst: String,
        src: Operand,
    },
    /// Zero-initialized declaration without initializer.
    Declare {
        dst: String,
    },
    BinOp {
        dst: String,
        op: BinaryOp,
        lhs: Operand,
        rhs: Operand,
        /// Result type is unsigned (drives the [0,inf) clamp).
        unsigned: bool,
    },
    UnOp {
        dst: String,
        op: UnaryOp,
        operand: Operand,
    },
    IndexRead {
        dst: String,
        cell: CellRef,
    },
    IndexWrite {
        cell: CellRef,
        src: Operand,
    },
    MemberRead {
        dst: String,
        cell: CellRef,
    },
    MemberWrite {
        cell: CellRef,
        src: Operand,
    },
    Condition {
        cond: String,
    },
    Require {
        cond: String,
    },
    Assert {
        cond: String,
    },
    Revert,
    Return {
        value: Option<Operand>,
    },
    BuiltinCall {
        callee: String,
        args: Vec<Operand>,
    },
    Nop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instr {
    pub kind: InstrKind,
    pub line: u32,
    /// Source spelling of the computed expression, for temporaries that can
    /// appear in constraints and reports.
    pub text: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Declaration,
    Expression,
    If,
    While,
    Return,
    Revert,
    EndPoint,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Declaration => "DECLARATION",
            NodeKind::Expression => "EXPRESSION",
            NodeKind::If => "IF",
            NodeKind::While => "WHILE",
            NodeKind::Return => "RETURN",
            NodeKind::Revert => "REVERT",
            NodeKind::EndPoint => "END",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IrNode {
    pub label: Label,
    pub kind: NodeKind,
    /// Statement header as spelled in the source.
    pub text: String,
    pub line: u32,
    pub instrs: Vec<Instr>,
}

#[derive(Debug, Clone)]
pub struct VarInfo {
    pub name: String,
    pub ty: MiniSolType,
    pub origin: Origin,
}

#[derive(Debug, Clone)]
pub struct FunctionIr {
    pub name: String,
    pub contract: String,
    pub nodes: Vec<IrNode>,
    pub edges: Vec<(Label, Label, EdgeKind)>,
    /// Every named variable and temporary with its declared type.
    pub vars: BTreeMap<String, VarInfo>,
    /// Every composite cell the function touches, by canonical name.
    pub cells: BTreeMap<String, CellRef>,
}

impl FunctionIr {
    pub fn node(&self, label: Label) -> &IrNode {
        &self.nodes[(label - 1) as usize]
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.nodes.iter().map(|n| n.label)
    }
}

#[derive(Debug, Clone)]
pub struct ContractIr {
    pub name: String,
    pub functions: Vec<FunctionIr>,
}

impl ContractIr {
    pub fn function(&self, name: &str) -> Option<&FunctionIr> {
        self.functions.iter().find(|f| f.name == name)
    }
}

/// Lowers every function of a type-checked contract. The temporary counter
/// is shared across functions in declaration order.
pub fn lower_contract(ast: &ContractAst, source: &str) -> Result<ContractIr, LoweringError> {
    let mut counters = Counters { tmp: 0, refn: 0 };
    let mut functions = Vec::new();
    for f in &ast.functions {
        functions.push(lower_function(f, ast, source, &mut counters)?);
    }
    Ok(ContractIr {
        name: ast.name.clone(),
        functions,
    })
}

struct Counters {
    tmp: u32,
    refn: u32,
}

struct Lowerer<'a> {
    source: &'a str,
    counters: &'a mut Counters,
    nodes: Vec<IrNode>,
    edges: Vec<(Label, Label, EdgeKind)>,
    vars: BTreeMap<String, VarInfo>,
    cells: BTreeMap<String, CellRef>,
    /// Pending instructions for the node being assembled.
    buf: Vec<Instr>,
}

/// Dangling exit of a lowered region: edges from `label` to whatever comes
/// next are created with `kind`.
type Exit = (Label, EdgeKind);

fn lower_function(
    f: &FunctionAst,
    ast: &ContractAst,
    source: &str,
    counters: &mut Counters,
) -> Result<FunctionIr, LoweringError> {
    let mut lw = Lowerer {
        source,
        counters,
        nodes: Vec::new(),
        edges: Vec::new(),
        vars: BTreeMap::new(),
        cells: BTreeMap::new(),
        buf: Vec::new(),
    };
    for p in &f.params {
        lw.register(&p.name, p.ty.clone(), Origin::Parameter);
    }
    for v in &ast.state_vars {
        lw.register(&v.name, v.ty.clone(), Origin::State);
    }
    for (base, field, ty) in crate::types::BUILTINS {
        lw.register(&format!("{base}.{field}"), ty.clone(), Origin::Builtin);
    }

    let exits = lw.lower_block(&f.body)?;
    if !exits.is_empty() {
        // fall-through functions get a synthetic end point
        let end = lw.open_node(NodeKind::EndPoint, "end of function".to_string(), f.line);
        lw.buf.push(Instr {
            kind: InstrKind::Nop,
            line: f.line,
            text: None,
        });
        lw.close_node(end);
        lw.connect(&exits, end);
    }
    Ok(FunctionIr {
        name: f.name.clone(),
        contract: ast.name.clone(),
        nodes: lw.nodes,
        edges: lw.edges,
        vars: lw.vars,
        cells: lw.cells,
    })
}

impl<'a> Lowerer<'a> {
    fn register(&mut self, name: &str, ty: MiniSolType, origin: Origin) {
        self.vars.insert(
            name.to_string(),
            VarInfo {
                name: name.to_string(),
                ty,
                origin,
            },
        );
    }

    /// Registers a local, renaming on collision between sibling scopes.
    fn register_local(&mut self, name: &str, ty: MiniSolType) -> String {
        let mut unique = name.to_string();
        let mut n = 1;
        while self.vars.contains_key(&unique) {
            n += 1;
            unique = format!("{name}#{n}");
        }
        self.register(&unique, ty, Origin::Local);
        unique
    }

    fn fresh_tmp(&mut self, ty: MiniSolType) -> String {
        let name = format!("TMP_{}", self.counters.tmp);
        self.counters.tmp += 1;
        self.register(&name, ty, Origin::Temporary);
        name
    }

    /// Builtin calls burn a temporary number for their void result.
    fn burn_tmp(&mut self) {
        self.counters.tmp += 1;
    }

    fn fresh_ref(&mut self, ty: MiniSolType) -> String {
        let name = format!("REF_{}", self.counters.refn);
        self.counters.refn += 1;
        self.register(&name, ty, Origin::Temporary);
        name
    }

    fn open_node(&mut self, kind: NodeKind, text: String, line: u32) -> Label {
        let label = (self.nodes.len() + 1) as Label;
        self.nodes.push(IrNode {
            label,
            kind,
            text,
            line,
            instrs: Vec::new(),
        });
        label
    }

    fn close_node(&mut self, label: Label) {
        let instrs = std::mem::take(&mut self.buf);
        self.nodes[(label - 1) as usize].instrs = instrs;
    }

    fn connect(&mut self, exits: &[Exit], target: Label) {
        for (from, kind) in exits {
            self.edges.push((*from, target, *kind));
        }
    }

    fn emit(&mut self, kind: InstrKind, line: u32, text: Option<String>) {
        self.buf.push(Instr { kind, line, text });
    }

    fn text_of(&self, span: crate::source::Span) -> String {
        span.slice(self.source).to_string()
    }

    // -- statements ---------------------------------------------------------

    fn lower_block(&mut self, stmts: &[Stmt]) -> Result<Vec<Exit>, LoweringError> {
        let mut pending: Vec<Exit> = Vec::new();
        let mut first = true;
        for s in stmts {
            if !first && pending.is_empty() {
                // everything after a terminator in the same block is
                // syntactically dead; MiniSol programs do not do this
                return Err(lerr(s.line, "statement after a terminator"));
            }
            let (entry, exits) = self.lower_stmt(s)?;
            if !first {
                self.connect(&pending, entry);
            }
            pending = exits;
            first = false;
        }
        Ok(pending)
    }

    /// Lowers one statement; returns its entry label and dangling exits.
    fn lower_stmt(&mut self, s: &Stmt) -> Result<(Label, Vec<Exit>), LoweringError> {
        let text = self.text_of(s.span);
        match &s.kind {
            StmtKind::VarDecl { ty, name, init } => {
                let label = self.open_node(NodeKind::Declaration, text, s.line);
                let unique = self.register_local(name, ty.clone());
                match init {
                    Some(e) => {
                        let src = self.lower_expr(e)?;
                        self.emit(InstrKind::Assign { dst: unique, src }, s.line, None);
                    }
                    None => {
                        self.emit(InstrKind::Declare { dst: unique }, s.line, None);
                    }
                }
                self.close_node(label);
                Ok((label, vec![(label, EdgeKind::Seq)]))
            }
            StmtKind::Assign { target, value } => {
                let label = self.open_node(NodeKind::Expression, text, s.line);
                let src = self.lower_expr(value)?;
                match &target.kind {
                    ExprKind::Ident(name) => {
                        let dst = self.resolve_name(name, target.line)?;
                        self.emit(InstrKind::Assign { dst, src }, s.line, None);
                    }
                    ExprKind::Index { .. } => {
                        let cell = self.lower_cell(target)?;
                        self.emit(InstrKind::IndexWrite { cell, src }, s.line, None);
                    }
                    ExprKind::Member { .. } => {
                        let cell = self.lower_cell(target)?;
                        self.emit(InstrKind::MemberWrite { cell, src }, s.line, None);
                    }
                    _ => return Err(lerr(target.line, "unsupported assignment target")),
                }
                self.close_node(label);
                Ok((label, vec![(label, EdgeKind::Seq)]))
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let head = self.open_node(NodeKind::If, text, s.line);
                let tmp = self.lower_condition(cond)?;
                self.emit(InstrKind::Condition { cond: tmp }, s.line, None);
                self.close_node(head);

                let mut exits = Vec::new();
                match self.lower_branch(then_body)? {
                    Some((entry, mut branch_exits)) => {
                        self.edges.push((head, entry, EdgeKind::BranchTrue));
                        exits.append(&mut branch_exits);
                    }
                    None => exits.push((head, EdgeKind::BranchTrue)),
                }
                match else_body {
                    Some(eb) => match self.lower_branch(eb)? {
                        Some((entry, mut branch_exits)) => {
                            self.edges.push((head, entry, EdgeKind::BranchFalse));
                            exits.append(&mut branch_exits);
                        }
                        None => exits.push((head, EdgeKind::BranchFalse)),
                    },
                    None => exits.push((head, EdgeKind::BranchFalse)),
                }
                Ok((head, exits))
            }
            StmtKind::While { cond, body } => {
                let head = self.open_node(NodeKind::While, text, s.line);
                let tmp = self.lower_condition(cond)?;
                self.emit(InstrKind::Condition { cond: tmp }, s.line, None);
                self.close_node(head);

                match self.lower_branch(body)? {
                    Some((entry, body_exits)) => {
                        self.edges.push((head, entry, EdgeKind::LoopBody));
                        for (from, _) in body_exits {
                            self.edges.push((from, head, EdgeKind::Back));
                        }
                    }
                    None => {
                        self.edges.push((head, head, EdgeKind::Back));
                    }
                }
                Ok((head, vec![(head, EdgeKind::LoopExit)]))
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                // lowered to its while equivalent: init; while(cond) { body; step; }
                let (init_label, init_exits) = self.lower_stmt(init)?;
                let head_text = format!("while ({})", self.text_of(cond.span));
                let head = self.open_node(NodeKind::While, head_text, cond.line);
                let tmp = self.lower_condition(cond)?;
                self.emit(InstrKind::Condition { cond: tmp }, cond.line, None);
                self.close_node(head);
                self.connect(&init_exits, head);

                let body_region = self.lower_branch(body)?;
                let (step_label, step_exits) = self.lower_stmt(step)?;
                match body_region {
                    Some((entry, body_exits)) => {
                        self.edges.push((head, entry, EdgeKind::LoopBody));
                        self.connect(&body_exits, step_label);
                    }
                    None => {
                        self.edges.push((head, step_label, EdgeKind::LoopBody));
                    }
                }
                for (from, _) in step_exits {
                    self.edges.push((from, head, EdgeKind::Back));
                }
                Ok((init_label, vec![(head, EdgeKind::LoopExit)]))
            }
            StmtKind::Require(cond) => {
                let label = self.open_node(NodeKind::Expression, text, s.line);
                let tmp = self.lower_condition(cond)?;
                self.emit(InstrKind::Require { cond: tmp }, s.line, None);
                self.burn_tmp();
                self.close_node(label);
                Ok((label, vec![(label, EdgeKind::Seq)]))
            }
            StmtKind::Assert(cond) => {
                let label = self.open_node(NodeKind::Expression, text, s.line);
                let tmp = self.lower_condition(cond)?;
                self.emit(InstrKind::Assert { cond: tmp }, s.line, None);
                self.burn_tmp();
                self.close_node(label);
                Ok((label, vec![(label, EdgeKind::Seq)]))
            }
            StmtKind::Revert(_) => {
                let label = self.open_node(NodeKind::Revert, text, s.line);
                self.emit(InstrKind::Revert, s.line, None);
                self.burn_tmp();
                self.close_node(label);
                Ok((label, Vec::new()))
            }
            StmtKind::Return(value) => {
                let label = self.open_node(NodeKind::Return, text, s.line);
                let value = match value {
                    Some(e) => Some(self.lower_expr(e)?),
                    None => None,
                };
                self.emit(InstrKind::Return { value }, s.line, None);
                self.close_node(label);
                Ok((label, Vec::new()))
            }
            StmtKind::Builtin { target, name, args } => {
                let label = self.open_node(NodeKind::Expression, text, s.line);
                let mut ops = vec![self.lower_expr(target)?];
                for a in args {
                    if matches!(a.kind, ExprKind::Str(_)) {
                        continue; // call payloads carry no analyzable value
                    }
                    ops.push(self.lower_expr(a)?);
                }
                self.emit(
                    InstrKind::BuiltinCall {
                        callee: name.clone(),
                        args: ops,
                    },
                    s.line,
                    None,
                );
                self.burn_tmp();
                self.close_node(label);
                Ok((label, vec![(label, EdgeKind::Seq)]))
            }
        }
    }

    /// Lowers a branch body; `None` when the body is empty.
    fn lower_branch(&mut self, body: &[Stmt]) -> Result<Option<(Label, Vec<Exit>)>, LoweringError> {
        if body.is_empty() {
            return Ok(None);
        }
        let first_label = (self.nodes.len() + 1) as Label;
        let exits = self.lower_block(body)?;
        Ok(Some((first_label, exits)))
    }

    // -- expressions ---------------------------------------------------------

    /// Guarantees the condition value sits in a temporary.
    fn lower_condition(&mut self, cond: &Expr) -> Result<String, LoweringError> {
        let op = self.lower_expr(cond)?;
        match op {
            Operand::Var(name)
                if self.vars.get(&name).map(|v| v.origin) == Some(Origin::Temporary) =>
            {
                Ok(name)
            }
            other => {
                let tmp = self.fresh_tmp(MiniSolType::Bool);
                self.emit(
                    InstrKind::Assign {
                        dst: tmp.clone(),
                        src: other,
                    },
                    cond.line,
                    Some(self.text_of(cond.span)),
                );
                Ok(tmp)
            }
        }
    }

    fn lower_expr(&mut self, e: &Expr) -> Result<Operand, LoweringError> {
        match &e.kind {
            ExprKind::Int(v) => Ok(Operand::Int(v.clone())),
            ExprKind::Bool(b) => Ok(Operand::Bool(*b)),
            ExprKind::Str(_) => Err(lerr(e.line, "string value in expression position")),
            ExprKind::Ident(name) => Ok(Operand::Var(self.resolve_name(name, e.line)?)),
            ExprKind::Member { base, field } => {
                if let ExprKind::Ident(b) = &base.kind {
                    if let Some((builtin, _)) = builtin_name(b, field) {
                        return Ok(Operand::Var(builtin));
                    }
                }
                let cell = self.lower_cell(e)?;
                let dst = self.fresh_ref(cell.value_ty.clone());
                self.emit(
                    InstrKind::MemberRead {
                        dst: dst.clone(),
                        cell,
                    },
                    e.line,
                    Some(self.text_of(e.span)),
                );
                Ok(Operand::Var(dst))
            }
            ExprKind::Index { .. } => {
                let cell = self.lower_cell(e)?;
                let dst = self.fresh_ref(cell.value_ty.clone());
                self.emit(
                    InstrKind::IndexRead {
                        dst: dst.clone(),
                        cell,
                    },
                    e.line,
                    Some(self.text_of(e.span)),
                );
                Ok(Operand::Var(dst))
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.lower_expr(lhs)?;
                let r = self.lower_expr(rhs)?;
                let ty = e.ty.clone().ok_or_else(|| lerr(e.line, "untyped expression"))?;
                let unsigned = ty.is_unsigned();
                let dst = self.fresh_tmp(ty);
                self.emit(
                    InstrKind::BinOp {
                        dst: dst.clone(),
                        op: *op,
                        lhs: l,
                        rhs: r,
                        unsigned,
                    },
                    e.line,
                    Some(self.text_of(e.span)),
                );
                Ok(Operand::Var(dst))
            }
            ExprKind::Unary { op, operand } => {
                let inner = self.lower_expr(operand)?;
                let ty = e.ty.clone().ok_or_else(|| lerr(e.line, "untyped expression"))?;
                let dst = self.fresh_tmp(ty);
                self.emit(
                    InstrKind::UnOp {
                        dst: dst.clone(),
                        op: *op,
                        operand: inner,
                    },
                    e.line,
                    Some(self.text_of(e.span)),
                );
                Ok(Operand::Var(dst))
            }
            ExprKind::PayableCast(inner) => {
                let src = self.lower_expr(inner)?;
                let dst = self.fresh_tmp(MiniSolType::Address);
                self.emit(
                    InstrKind::Assign {
                        dst: dst.clone(),
                        src,
                    },
                    e.line,
                    Some(self.text_of(e.span)),
                );
                Ok(Operand::Var(dst))
            }
        }
    }

    fn resolve_name(&self, name: &str, line: u32) -> Result<String, LoweringError> {
        // locals may have been renamed on sibling-scope collisions; the last
        // registered variant is the one in scope
        if self.vars.contains_key(name) {
            let mut unique = name.to_string();
            let mut n = 2;
            while self.vars.contains_key(&format!("{name}#{n}")) {
                unique = format!("{name}#{n}");
                n += 1;
            }
            Ok(unique)
        } else {
            Err(lerr(line, format!("unknown variable '{name}'")))
        }
    }

    /// Builds the cell reference for a member/index chain rooted at a named
    /// composite. Constant subscripts become index keys, everything else a
    /// summary key named by the canonical key text.
    fn lower_cell(&mut self, e: &Expr) -> Result<CellRef, LoweringError> {
        let value_ty = e
            .ty
            .clone()
            .ok_or_else(|| lerr(e.line, "untyped cell access"))?;
        let mut path_rev: Vec<(CellKey, Option<Operand>)> = Vec::new();
        let mut cur = e;
        loop {
            match &cur.kind {
                ExprKind::Index { base, index } => {
                    let entry = match &index.kind {
                        ExprKind::Int(v) => {
                            (CellKey::Index(v.clone()), Some(Operand::Int(v.clone())))
                        }
                        _ => {
                            let op = self.lower_expr(index)?;
                            (CellKey::Summary(index.canonical()), Some(op))
                        }
                    };
                    path_rev.push(entry);
                    cur = base;
                }
                ExprKind::Member { base, field } => {
                    path_rev.push((CellKey::Field(field.clone()), None));
                    cur = base;
                }
                ExprKind::Ident(name) => {
                    let base = self.resolve_name(name, cur.line)?;
                    let info = self.vars.get(&base).expect("resolved");
                    if !info.ty.is_composite() {
                        return Err(lerr(cur.line, format!("'{name}' is not a composite")));
                    }
                    let (path, subs): (Vec<CellKey>, Vec<Option<Operand>>) =
                        path_rev.into_iter().rev().unzip();
                    let cell = CellRef {
                        canonical: e.canonical(),
                        base,
                        path,
                        subs,
                        value_ty,
                    };
                    self.cells.insert(cell.canonical.clone(), cell.clone());
                    return Ok(cell);
                }
                _ => return Err(lerr(cur.line, "unsupported composite access")),
            }
        }
    }
}
