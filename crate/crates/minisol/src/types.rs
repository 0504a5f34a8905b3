//! Type checker. Annotates every expression with its `MiniSolType` and
//! resolves struct references. `msg.sender`, `msg.value`, `block.timestamp`,
//! `block.number` and `block.difficulty` are in scope of every function.

use std::collections::BTreeMap;

use crate::ast::*;
use crate::domain::interval::ArithOp;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("type error at line {line}: {message}")]
pub struct TypeError {
    pub line: u32,
    pub message: String,
}

fn err(line: u32, message: impl Into<String>) -> TypeError {
    TypeError {
        line,
        message: message.into(),
    }
}

/// The chain-supplied variables visible in every function body.
pub const BUILTINS: &[(&str, &str, MiniSolType)] = &[
    ("msg", "sender", MiniSolType::Address),
    ("msg", "value", MiniSolType::UInt(256)),
    ("block", "timestamp", MiniSolType::UInt(256)),
    ("block", "number", MiniSolType::UInt(256)),
    ("block", "difficulty", MiniSolType::UInt(256)),
];

pub fn builtin_name(base: &str, field: &str) -> Option<(String, MiniSolType)> {
    BUILTINS
        .iter()
        .find(|(b, f, _)| *b == base && *f == field)
        .map(|(b, f, t)| (format!("{b}.{f}"), t.clone()))
}

/// Checks the whole contract, returning it with every expression annotated.
pub fn check_types(mut ast: ContractAst) -> Result<ContractAst, TypeError> {
    let mut structs: BTreeMap<String, Vec<(String, MiniSolType)>> = BTreeMap::new();
    for s in &ast.structs {
        if structs.contains_key(&s.name) {
            return Err(err(s.line, format!("duplicate struct '{}'", s.name)));
        }
        structs.insert(s.name.clone(), s.fields.clone());
    }
    // struct fields may themselves reference structs
    let resolved_structs: BTreeMap<String, Vec<(String, MiniSolType)>> = {
        let mut out = BTreeMap::new();
        for s in &ast.structs {
            let fields = s
                .fields
                .iter()
                .map(|(n, t)| Ok((n.clone(), resolve_type(t, &structs, s.line)?)))
                .collect::<Result<Vec<_>, TypeError>>()?;
            let mut names: Vec<&String> = fields.iter().map(|(n, _)| n).collect();
            names.sort();
            names.dedup();
            if names.len() != fields.len() {
                return Err(err(s.line, format!("duplicate field in struct '{}'", s.name)));
            }
            out.insert(s.name.clone(), fields);
        }
        out
    };

    let mut state: BTreeMap<String, MiniSolType> = BTreeMap::new();
    for v in &mut ast.state_vars {
        v.ty = resolve_type(&v.ty, &resolved_structs, v.line)?;
        if state.insert(v.name.clone(), v.ty.clone()).is_some() {
            return Err(err(v.line, format!("duplicate state variable '{}'", v.name)));
        }
    }

    let mut fn_names: Vec<&String> = ast.functions.iter().map(|f| &f.name).collect();
    fn_names.sort();
    fn_names.dedup();
    if fn_names.len() != ast.functions.len() {
        return Err(err(ast.line, "duplicate function name"));
    }

    for f in &mut ast.functions {
        check_function(f, &state, &resolved_structs)?;
    }
    Ok(ast)
}

fn resolve_type(
    ty: &MiniSolType,
    structs: &BTreeMap<String, Vec<(String, MiniSolType)>>,
    line: u32,
) -> Result<MiniSolType, TypeError> {
    Ok(match ty {
        MiniSolType::Struct { name, .. } => match structs.get(name) {
            Some(fields) => MiniSolType::Struct {
                name: name.clone(),
                fields: fields.clone(),
            },
            None => return Err(err(line, format!("unknown type '{name}'"))),
        },
        MiniSolType::Array { elem, len } => MiniSolType::Array {
            elem: Box::new(resolve_type(elem, structs, line)?),
            len: *len,
        },
        MiniSolType::Mapping { key, value } => {
            let key = resolve_type(key, structs, line)?;
            if key.is_composite() {
                return Err(err(line, "mapping keys must be scalar types"));
            }
            MiniSolType::Mapping {
                key: Box::new(key),
                value: Box::new(resolve_type(value, structs, line)?),
            }
        }
        other => other.clone(),
    })
}

struct Scope<'a> {
    state: &'a BTreeMap<String, MiniSolType>,
    structs: &'a BTreeMap<String, Vec<(String, MiniSolType)>>,
    params: BTreeMap<String, MiniSolType>,
    /// Stack of block scopes for locals.
    locals: Vec<BTreeMap<String, MiniSolType>>,
}

impl<'a> Scope<'a> {
    fn lookup(&self, name: &str) -> Option<&MiniSolType> {
        for block in self.locals.iter().rev() {
            if let Some(t) = block.get(name) {
                return Some(t);
            }
        }
        self.params.get(name).or_else(|| self.state.get(name))
    }

    fn declare(&mut self, name: &str, ty: MiniSolType, line: u32) -> Result<(), TypeError> {
        if self.lookup(name).is_some() {
            return Err(err(line, format!("'{name}' is already declared")));
        }
        self.locals
            .last_mut()
            .expect("scope stack")
            .insert(name.to_string(), ty);
        Ok(())
    }
}

fn check_function(
    f: &mut FunctionAst,
    state: &BTreeMap<String, MiniSolType>,
    structs: &BTreeMap<String, Vec<(String, MiniSolType)>>,
) -> Result<(), TypeError> {
    let mut params = BTreeMap::new();
    for p in &mut f.params {
        p.ty = resolve_type(&p.ty, structs, p.line)?;
        if matches!(p.ty, MiniSolType::Mapping { .. }) {
            return Err(err(p.line, "mapping parameters are not supported"));
        }
        if params.insert(p.name.clone(), p.ty.clone()).is_some() {
            return Err(err(p.line, format!("duplicate parameter '{}'", p.name)));
        }
    }
    if let Some(r) = &f.returns {
        let _ = resolve_type(r, structs, f.line)?;
    }
    let mut scope = Scope {
        state,
        structs,
        params,
        locals: vec![BTreeMap::new()],
    };
    let returns = f.returns.clone();
    for s in &mut f.body {
        check_stmt(s, &mut scope, returns.as_ref())?;
    }
    Ok(())
}

fn check_stmt(
    s: &mut Stmt,
    scope: &mut Scope,
    returns: Option<&MiniSolType>,
) -> Result<(), TypeError> {
    let line = s.line;
    match &mut s.kind {
        StmtKind::VarDecl { ty, name, init } => {
            *ty = resolve_type(ty, scope.structs, line)?;
            if matches!(ty, MiniSolType::Mapping { .. }) {
                return Err(err(line, "mappings can only be state variables"));
            }
            if let Some(e) = init {
                let it = check_expr(e, scope)?;
                if !assignable(ty, &it) {
                    return Err(err(line, format!("cannot initialize {ty} from {it}")));
                }
            }
            scope.declare(name, ty.clone(), line)
        }
        StmtKind::Assign { target, value } => {
            let tt = check_lvalue(target, scope)?;
            let vt = check_expr(value, scope)?;
            if !assignable(&tt, &vt) {
                return Err(err(line, format!("cannot assign {vt} to {tt}")));
            }
            Ok(())
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            expect_bool(cond, scope, "if condition")?;
            scope.locals.push(BTreeMap::new());
            for st in then_body {
                check_stmt(st, scope, returns)?;
            }
            scope.locals.pop();
            if let Some(eb) = else_body {
                scope.locals.push(BTreeMap::new());
                for st in eb {
                    check_stmt(st, scope, returns)?;
                }
                scope.locals.pop();
            }
            Ok(())
        }
        StmtKind::While { cond, body } => {
            expect_bool(cond, scope, "while condition")?;
            scope.locals.push(BTreeMap::new());
            for st in body {
                check_stmt(st, scope, returns)?;
            }
            scope.locals.pop();
            Ok(())
        }
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => {
            // the induction variable lives in the loop scope
            scope.locals.push(BTreeMap::new());
            check_stmt(init, scope, returns)?;
            expect_bool(cond, scope, "for condition")?;
            check_stmt(step, scope, returns)?;
            for st in body {
                check_stmt(st, scope, returns)?;
            }
            scope.locals.pop();
            Ok(())
        }
        StmtKind::Require(e) => expect_bool(e, scope, "require argument"),
        StmtKind::Assert(e) => expect_bool(e, scope, "assert argument"),
        StmtKind::Revert(_) => Ok(()),
        StmtKind::Return(e) => match (e, returns) {
            (None, None) => Ok(()),
            (None, Some(_)) => Err(err(line, "missing return value")),
            (Some(_), None) => Err(err(line, "function has no return type")),
            (Some(e), Some(rt)) => {
                let et = check_expr(e, scope)?;
                if assignable(rt, &et) {
                    Ok(())
                } else {
                    Err(err(line, format!("cannot return {et} as {rt}")))
                }
            }
        },
        StmtKind::Builtin { target, name, args } => {
            let tt = check_expr(target, scope)?;
            if tt != MiniSolType::Address {
                return Err(err(line, format!("'{name}' requires an address, got {tt}")));
            }
            match name.as_str() {
                "transfer" | "send" => {
                    if args.len() != 1 {
                        return Err(err(line, format!("'{name}' takes one amount argument")));
                    }
                    let at = check_expr(&mut args[0], scope)?;
                    if !at.is_numeric() {
                        return Err(err(line, format!("'{name}' amount must be numeric")));
                    }
                    Ok(())
                }
                "call" => {
                    for a in args {
                        let _ = check_expr(a, scope)?;
                    }
                    Ok(())
                }
                other => Err(err(line, format!("unknown builtin call '{other}'"))),
            }
        }
    }
}

fn expect_bool(e: &mut Expr, scope: &mut Scope, what: &str) -> Result<(), TypeError> {
    let t = check_expr(e, scope)?;
    if t == MiniSolType::Bool {
        Ok(())
    } else {
        Err(err(e.line, format!("{what} must be bool, got {t}")))
    }
}

/// Assignment targets: identifiers, index cells, struct members.
fn check_lvalue(e: &mut Expr, scope: &mut Scope) -> Result<MiniSolType, TypeError> {
    match &e.kind {
        ExprKind::Ident(_) | ExprKind::Index { .. } => check_expr(e, scope),
        ExprKind::Member { base, .. } => {
            // struct member writes are fine; msg.*/block.* are not
            if let ExprKind::Ident(b) = &base.kind {
                if b == "msg" || b == "block" {
                    return Err(err(e.line, "cannot assign to a builtin variable"));
                }
            }
            check_expr(e, scope)
        }
        _ => Err(err(e.line, "not an assignable target")),
    }
}

fn check_expr(e: &mut Expr, scope: &mut Scope) -> Result<MiniSolType, TypeError> {
    let line = e.line;
    let ty = match &mut e.kind {
        ExprKind::Int(_) => MiniSolType::uint(),
        ExprKind::Bool(_) => MiniSolType::Bool,
        ExprKind::Str(_) => {
            return Err(err(line, "string literals are only allowed in revert/call"))
        }
        ExprKind::Ident(name) => {
            if name == "msg" || name == "block" {
                return Err(err(line, format!("'{name}' is only valid with a member access")));
            }
            match scope.lookup(name) {
                Some(t) => t.clone(),
                None => return Err(err(line, format!("unknown identifier '{name}'"))),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let lt = check_expr(lhs, scope)?;
            let rt = check_expr(rhs, scope)?;
            match op {
                BinaryOp::Arith(aop) => {
                    let numeric = |t: &MiniSolType| matches!(t, MiniSolType::UInt(_) | MiniSolType::Int(_));
                    if !numeric(&lt) || !numeric(&rt) {
                        return Err(err(
                            line,
                            format!("'{}' needs integer operands, got {lt} and {rt}", sym(*aop)),
                        ));
                    }
                    if matches!(lt, MiniSolType::Int(_)) || matches!(rt, MiniSolType::Int(_)) {
                        MiniSolType::Int(256)
                    } else {
                        MiniSolType::uint()
                    }
                }
                BinaryOp::Cmp(_) => {
                    let ok = (lt.is_numeric() && rt.is_numeric())
                        || (lt == MiniSolType::Bool && rt == MiniSolType::Bool);
                    if !ok {
                        return Err(err(line, format!("cannot compare {lt} with {rt}")));
                    }
                    MiniSolType::Bool
                }
                BinaryOp::And | BinaryOp::Or => {
                    if lt != MiniSolType::Bool || rt != MiniSolType::Bool {
                        return Err(err(line, format!("logical operator needs bools, got {lt} and {rt}")));
                    }
                    MiniSolType::Bool
                }
            }
        }
        ExprKind::Unary { op, operand } => {
            let ot = check_expr(operand, scope)?;
            match op {
                UnaryOp::Neg => {
                    if !matches!(ot, MiniSolType::UInt(_) | MiniSolType::Int(_)) {
                        return Err(err(line, format!("cannot negate {ot}")));
                    }
                    MiniSolType::Int(256)
                }
                UnaryOp::Not => {
                    if ot != MiniSolType::Bool {
                        return Err(err(line, format!("'!' needs bool, got {ot}")));
                    }
                    MiniSolType::Bool
                }
            }
        }
        ExprKind::Index { base, index } => {
            let bt = check_expr(base, scope)?;
            let it = check_expr(index, scope)?;
            match bt {
                MiniSolType::Array { elem, .. } => {
                    if !it.is_numeric() {
                        return Err(err(line, format!("array index must be numeric, got {it}")));
                    }
                    (*elem).clone()
                }
                MiniSolType::Mapping { key, value } => {
                    if !key_compatible(&key, &it) {
                        return Err(err(line, format!("mapping expects {key} keys, got {it}")));
                    }
                    (*value).clone()
                }
                other => return Err(err(line, format!("cannot index into {other}"))),
            }
        }
        ExprKind::Member { base, field } => {
            if let ExprKind::Ident(b) = &base.kind {
                if let Some((_, t)) = builtin_name(b, field) {
                    base.ty = Some(MiniSolType::Address); // placeholder for the namespace ident
                    e.ty = Some(t.clone());
                    return Ok(t);
                }
                if (b == "msg" || b == "block") && scope.lookup(b).is_none() {
                    return Err(err(line, format!("unknown builtin '{b}.{field}'")));
                }
            }
            let bt = check_expr(base, scope)?;
            match bt {
                MiniSolType::Struct { name, fields } => {
                    match fields.iter().find(|(n, _)| n == field) {
                        Some((_, t)) => t.clone(),
                        None => {
                            return Err(err(line, format!("struct '{name}' has no field '{field}'")))
                        }
                    }
                }
                other => return Err(err(line, format!("{other} has no members"))),
            }
        }
        ExprKind::PayableCast(inner) => {
            let it = check_expr(inner, scope)?;
            if it != MiniSolType::Address {
                return Err(err(line, format!("payable() expects an address, got {it}")));
            }
            MiniSolType::Address
        }
    };
    e.ty = Some(ty.clone());
    Ok(ty)
}

fn sym(op: ArithOp) -> &'static str {
    match op {
        ArithOp::Add => "+",
        ArithOp::Sub => "-",
        ArithOp::Mul => "*",
        ArithOp::Div => "/",
        ArithOp::Mod => "%",
    }
}

fn key_compatible(key: &MiniSolType, index: &MiniSolType) -> bool {
    match (key, index) {
        (MiniSolType::Address, MiniSolType::Address) => true,
        (MiniSolType::UInt(_) | MiniSolType::Int(_), t) => t.is_numeric(),
        (a, b) => a == b,
    }
}

/// Loose numeric compatibility: uint/int literals and values interchange,
/// addresses only match addresses.
fn assignable(dst: &MiniSolType, src: &MiniSolType) -> bool {
    match (dst, src) {
        (MiniSolType::UInt(_) | MiniSolType::Int(_), MiniSolType::UInt(_) | MiniSolType::Int(_)) => true,
        (a, b) => a == b,
    }
}
