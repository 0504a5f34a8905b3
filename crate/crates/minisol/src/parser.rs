//! Recursive-descent parser producing a `ContractAst`.
//!
//! Reports the first violation with the line and the expected token set;
//! there is no error recovery.

use num_bigint::BigInt;

use crate::ast::*;
use crate::domain::interval::{ArithOp, CmpOp};
use crate::source::Span;
use crate::token::{Keyword, Op, Punct, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}: expected {expected}, found '{found}'")]
pub struct ParseError {
    pub line: u32,
    pub expected: String,
    pub found: String,
}

pub fn parse_contract(tokens: &[Token]) -> Result<ContractAst, ParseError> {
    let mut p = Parser { toks: tokens, at: 0 };
    let c = p.contract()?;
    p.expect_eof()?;
    Ok(c)
}

struct Parser<'a> {
    toks: &'a [Token],
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek_ahead(&self, n: usize) -> &Token {
        &self.toks[(self.at + n).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.at.min(self.toks.len() - 1)];
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.pos.line,
            expected: expected.to_string(),
            found: if matches!(t.kind, TokenKind::Eof) {
                "end of input".to_string()
            } else {
                t.lexeme.clone()
            },
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        if self.peek().kind == TokenKind::Keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: Keyword, what: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.peek().kind == TokenKind::Punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: Punct, what: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn eat_op(&mut self, op: Op) -> bool {
        if self.peek().kind == TokenKind::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, u32, Span), ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let t = self.bump();
                Ok((name, t.pos.line, t.span))
            }
            _ => Err(self.err(what)),
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek().kind, TokenKind::Eof) {
            Ok(())
        } else {
            Err(self.err("end of input"))
        }
    }

    // -- contract level ----------------------------------------------------

    fn contract(&mut self) -> Result<ContractAst, ParseError> {
        let mut pragma = None;
        if self.eat_kw(Keyword::Pragma) {
            if let TokenKind::PragmaBody(body) = &self.peek().kind {
                pragma = Some(body.clone());
                self.bump();
            }
            self.expect_punct(Punct::Semi, "';' after pragma")?;
        }
        let line = self.peek().pos.line;
        self.expect_kw(Keyword::Contract, "'contract'")?;
        let (name, _, _) = self.ident("contract name")?;
        self.expect_punct(Punct::LBrace, "'{'")?;

        let mut structs = Vec::new();
        let mut state_vars = Vec::new();
        let mut functions = Vec::new();
        while !self.eat_punct(Punct::RBrace) {
            match self.peek().kind {
                TokenKind::Keyword(Keyword::Struct) => structs.push(self.struct_def()?),
                TokenKind::Keyword(Keyword::Function) => functions.push(self.function()?),
                TokenKind::Eof => return Err(self.err("'}' closing the contract")),
                _ => state_vars.push(self.state_var()?),
            }
        }
        Ok(ContractAst {
            name,
            pragma,
            structs,
            state_vars,
            functions,
            line,
        })
    }

    fn struct_def(&mut self) -> Result<StructDef, ParseError> {
        let line = self.peek().pos.line;
        self.bump(); // struct
        let (name, _, _) = self.ident("struct name")?;
        self.expect_punct(Punct::LBrace, "'{'")?;
        let mut fields = Vec::new();
        while !self.eat_punct(Punct::RBrace) {
            let ty = self.type_name()?;
            let (fname, _, _) = self.ident("field name")?;
            self.expect_punct(Punct::Semi, "';' after struct field")?;
            fields.push((fname, ty));
        }
        Ok(StructDef { name, fields, line })
    }

    fn state_var(&mut self) -> Result<StateVar, ParseError> {
        let line = self.peek().pos.line;
        let ty = self.type_name()?;
        let visibility = self.visibility();
        let (name, _, _) = self.ident("state variable name")?;
        self.expect_punct(Punct::Semi, "';' after state variable")?;
        Ok(StateVar {
            name,
            ty,
            visibility,
            line,
        })
    }

    fn visibility(&mut self) -> Visibility {
        if self.eat_kw(Keyword::Public) {
            Visibility::Public
        } else if self.eat_kw(Keyword::Private) {
            Visibility::Private
        } else if self.eat_kw(Keyword::Internal) {
            Visibility::Internal
        } else if self.eat_kw(Keyword::External) {
            Visibility::External
        } else {
            Visibility::Default
        }
    }

    fn data_location(&mut self) {
        // memory/storage/calldata are accepted and ignored
        let _ = self.eat_kw(Keyword::Memory)
            || self.eat_kw(Keyword::Storage)
            || self.eat_kw(Keyword::Calldata);
    }

    fn function(&mut self) -> Result<FunctionAst, ParseError> {
        let line = self.peek().pos.line;
        self.bump(); // function
        let (name, _, _) = self.ident("function name")?;
        self.expect_punct(Punct::LParen, "'('")?;
        let mut params = Vec::new();
        if !self.eat_punct(Punct::RParen) {
            loop {
                let ty = self.type_name()?;
                self.data_location();
                let (pname, pline, _) = self.ident("parameter name")?;
                params.push(Param {
                    name: pname,
                    ty,
                    line: pline,
                });
                if self.eat_punct(Punct::RParen) {
                    break;
                }
                self.expect_punct(Punct::Comma, "',' or ')'")?;
            }
        }
        let mut visibility = Visibility::Default;
        let mut mutability = Mutability::Default;
        loop {
            match self.peek().kind {
                TokenKind::Keyword(Keyword::Public) => {
                    visibility = Visibility::Public;
                    self.bump();
                }
                TokenKind::Keyword(Keyword::Private) => {
                    visibility = Visibility::Private;
                    self.bump();
                }
                TokenKind::Keyword(Keyword::Internal) => {
                    visibility = Visibility::Internal;
                    self.bump();
                }
                TokenKind::Keyword(Keyword::External) => {
                    visibility = Visibility::External;
                    self.bump();
                }
                TokenKind::Keyword(Keyword::Pure) => {
                    mutability = Mutability::Pure;
                    self.bump();
                }
                TokenKind::Keyword(Keyword::View) => {
                    mutability = Mutability::View;
                    self.bump();
                }
                // `payable` here is a mutability, not the cast
                TokenKind::Keyword(Keyword::Payable) => {
                    mutability = Mutability::Payable;
                    self.bump();
                }
                _ => break,
            }
        }
        let returns = if self.eat_kw(Keyword::Returns) {
            self.expect_punct(Punct::LParen, "'(' after returns")?;
            let ty = self.type_name()?;
            self.data_location();
            self.expect_punct(Punct::RParen, "')' closing returns")?;
            Some(ty)
        } else {
            None
        };
        let body = self.block()?;
        Ok(FunctionAst {
            name,
            params,
            returns,
            visibility,
            mutability,
            body,
            line,
        })
    }

    // -- types ---------------------------------------------------------------

    fn type_name(&mut self) -> Result<MiniSolType, ParseError> {
        let base = match &self.peek().kind {
            TokenKind::Keyword(Keyword::Bool) => {
                self.bump();
                MiniSolType::Bool
            }
            TokenKind::Keyword(Keyword::Address) => {
                self.bump();
                // `address payable` is accepted as plain address
                let _ = self.eat_kw(Keyword::Payable);
                MiniSolType::Address
            }
            TokenKind::Keyword(Keyword::Mapping) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after mapping")?;
                let key = self.type_name()?;
                if !self.eat_op(Op::Arrow) {
                    return Err(self.err("'=>' in mapping type"));
                }
                let value = self.type_name()?;
                self.expect_punct(Punct::RParen, "')' closing mapping type")?;
                MiniSolType::Mapping {
                    key: Box::new(key),
                    value: Box::new(value),
                }
            }
            TokenKind::Ident(name) => {
                let ty = match int_type(name) {
                    Some(t) => t,
                    None => MiniSolType::Struct {
                        name: name.clone(),
                        fields: Vec::new(),
                    },
                };
                self.bump();
                ty
            }
            _ => return Err(self.err("a type name")),
        };
        let mut ty = base;
        while self.peek().kind == TokenKind::Punct(Punct::LBracket) {
            // a type suffix holds an optional integer literal then ']'
            let len = match (&self.peek_ahead(1).kind, &self.peek_ahead(2).kind) {
                (TokenKind::Punct(Punct::RBracket), _) => {
                    self.bump();
                    self.bump();
                    None
                }
                (TokenKind::Int(n), TokenKind::Punct(Punct::RBracket)) => {
                    let n: u64 = n.try_into().map_err(|_| self.err("a small array length"))?;
                    self.bump();
                    self.bump();
                    self.bump();
                    Some(n)
                }
                _ => break,
            };
            ty = MiniSolType::Array {
                elem: Box::new(ty),
                len,
            };
        }
        Ok(ty)
    }

    // -- statements ----------------------------------------------------------

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_punct(Punct::LBrace, "'{'")?;
        let mut out = Vec::new();
        while !self.eat_punct(Punct::RBrace) {
            if matches!(self.peek().kind, TokenKind::Eof) {
                return Err(self.err("'}' closing the block"));
            }
            out.push(self.statement()?);
        }
        Ok(out)
    }

    fn block_or_single(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if self.peek().kind == TokenKind::Punct(Punct::LBrace) {
            self.block()
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let start = self.peek().span;
        let line = self.peek().pos.line;
        match self.peek().kind {
            TokenKind::Keyword(Keyword::If) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after if")?;
                let cond = self.expr()?;
                let header_end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing if condition")?;
                let then_body = self.block_or_single()?;
                let else_body = if self.eat_kw(Keyword::Else) {
                    Some(self.block_or_single()?)
                } else {
                    None
                };
                Ok(Stmt {
                    kind: StmtKind::If {
                        cond,
                        then_body,
                        else_body,
                    },
                    line,
                    span: start.to(header_end),
                })
            }
            TokenKind::Keyword(Keyword::While) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after while")?;
                let cond = self.expr()?;
                let header_end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing while condition")?;
                let body = self.block_or_single()?;
                Ok(Stmt {
                    kind: StmtKind::While { cond, body },
                    line,
                    span: start.to(header_end),
                })
            }
            TokenKind::Keyword(Keyword::For) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after for")?;
                let init = self.simple_statement()?;
                let cond = self.expr()?;
                self.expect_punct(Punct::Semi, "';' after for condition")?;
                let step = self.assign_like(false)?;
                let header_end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing for header")?;
                let body = self.block_or_single()?;
                Ok(Stmt {
                    kind: StmtKind::For {
                        init: Box::new(init),
                        cond,
                        step: Box::new(step),
                        body,
                    },
                    line,
                    span: start.to(header_end),
                })
            }
            TokenKind::Keyword(Keyword::Require) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after require")?;
                let cond = self.expr()?;
                // an optional message argument is accepted and dropped
                if self.eat_punct(Punct::Comma) {
                    let _ = self.expr()?;
                }
                let end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing require")?;
                self.expect_punct(Punct::Semi, "';' after require")?;
                Ok(Stmt {
                    kind: StmtKind::Require(cond),
                    line,
                    span: start.to(end),
                })
            }
            TokenKind::Keyword(Keyword::Assert) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after assert")?;
                let cond = self.expr()?;
                let end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing assert")?;
                self.expect_punct(Punct::Semi, "';' after assert")?;
                Ok(Stmt {
                    kind: StmtKind::Assert(cond),
                    line,
                    span: start.to(end),
                })
            }
            TokenKind::Keyword(Keyword::Revert) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after revert")?;
                let msg = match &self.peek().kind {
                    TokenKind::Str(s) => {
                        let s = s.clone();
                        self.bump();
                        Some(s)
                    }
                    _ => None,
                };
                let end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing revert")?;
                self.expect_punct(Punct::Semi, "';' after revert")?;
                Ok(Stmt {
                    kind: StmtKind::Revert(msg),
                    line,
                    span: start.to(end),
                })
            }
            TokenKind::Keyword(Keyword::Return) => {
                self.bump();
                let value = if self.peek().kind == TokenKind::Punct(Punct::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                let end = value.as_ref().map(|e| e.span).unwrap_or(start);
                self.expect_punct(Punct::Semi, "';' after return")?;
                Ok(Stmt {
                    kind: StmtKind::Return(value),
                    line,
                    span: start.to(end),
                })
            }
            _ => self.simple_statement(),
        }
    }

    /// Declaration, assignment, or builtin-call statement (with its `;`).
    fn simple_statement(&mut self) -> Result<Stmt, ParseError> {
        if self.starts_declaration() {
            let start = self.peek().span;
            let line = self.peek().pos.line;
            let ty = self.type_name()?;
            self.data_location();
            let (name, _, name_span) = self.ident("variable name")?;
            let init = if self.eat_op(Op::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            let end = init.as_ref().map(|e| e.span).unwrap_or(name_span);
            self.expect_punct(Punct::Semi, "';' after declaration")?;
            return Ok(Stmt {
                kind: StmtKind::VarDecl { ty, name, init },
                line,
                span: start.to(end),
            });
        }
        self.assign_like(true)
    }

    /// A statement is a declaration when it starts with a type keyword, or
    /// with an identifier followed by another identifier (possibly across
    /// one array suffix).
    fn starts_declaration(&self) -> bool {
        match &self.peek().kind {
            TokenKind::Keyword(Keyword::Bool)
            | TokenKind::Keyword(Keyword::Address)
            | TokenKind::Keyword(Keyword::Mapping) => true,
            TokenKind::Ident(_) => {
                let mut i = 1;
                if self.peek_ahead(i).kind == TokenKind::Punct(Punct::LBracket) {
                    i += 1;
                    if matches!(self.peek_ahead(i).kind, TokenKind::Int(_)) {
                        i += 1;
                    }
                    if self.peek_ahead(i).kind == TokenKind::Punct(Punct::RBracket) {
                        i += 1;
                    } else {
                        return false;
                    }
                }
                matches!(
                    self.peek_ahead(i).kind,
                    TokenKind::Ident(_)
                        | TokenKind::Keyword(Keyword::Memory)
                        | TokenKind::Keyword(Keyword::Storage)
                        | TokenKind::Keyword(Keyword::Calldata)
                )
            }
            _ => false,
        }
    }

    /// Assignment (`=`, compound, `++`/`--`) or builtin-call statement.
    /// `want_semi` is false inside a `for` header's step slot.
    fn assign_like(&mut self, want_semi: bool) -> Result<Stmt, ParseError> {
        let start = self.peek().span;
        let line = self.peek().pos.line;
        let target = self.expr()?;

        match self.peek().kind {
            TokenKind::Op(Op::Assign) => {
                self.bump();
                let value = self.expr()?;
                let end = value.span;
                if want_semi {
                    self.expect_punct(Punct::Semi, "';' after assignment")?;
                }
                Ok(Stmt {
                    kind: StmtKind::Assign { target, value },
                    line,
                    span: start.to(end),
                })
            }
            TokenKind::Op(Op::PlusAssign) => self.compound(start, line, target, ArithOp::Add, want_semi),
            TokenKind::Op(Op::MinusAssign) => self.compound(start, line, target, ArithOp::Sub, want_semi),
            TokenKind::Op(Op::StarAssign) => self.compound(start, line, target, ArithOp::Mul, want_semi),
            TokenKind::Op(Op::SlashAssign) => self.compound(start, line, target, ArithOp::Div, want_semi),
            TokenKind::Op(Op::PercentAssign) => self.compound(start, line, target, ArithOp::Mod, want_semi),
            TokenKind::Op(op @ (Op::PlusPlus | Op::MinusMinus)) => {
                let end = self.bump().span;
                if want_semi {
                    self.expect_punct(Punct::Semi, "';' after statement")?;
                }
                let span = start.to(end);
                let one = Expr {
                    kind: ExprKind::Int(BigInt::from(1)),
                    line,
                    span,
                    ty: None,
                };
                let arith = if op == Op::PlusPlus {
                    ArithOp::Add
                } else {
                    ArithOp::Sub
                };
                let value = Expr {
                    kind: ExprKind::Binary {
                        op: BinaryOp::Arith(arith),
                        lhs: Box::new(target.clone()),
                        rhs: Box::new(one),
                    },
                    line,
                    span,
                    ty: None,
                };
                Ok(Stmt {
                    kind: StmtKind::Assign { target, value },
                    line,
                    span,
                })
            }
            TokenKind::Punct(Punct::LParen) => {
                // builtin call statement: <expr>.<name>(args)
                let (base, name) = match target.kind {
                    ExprKind::Member { base, field } => (*base, field),
                    _ => return Err(self.err("'=' or a builtin call")),
                };
                self.bump();
                let mut args = Vec::new();
                if !self.eat_punct(Punct::RParen) {
                    loop {
                        args.push(self.expr()?);
                        if self.eat_punct(Punct::RParen) {
                            break;
                        }
                        self.expect_punct(Punct::Comma, "',' or ')'")?;
                    }
                }
                let end = self.toks[self.at - 1].span;
                if want_semi {
                    self.expect_punct(Punct::Semi, "';' after call")?;
                }
                Ok(Stmt {
                    kind: StmtKind::Builtin {
                        target: base,
                        name,
                        args,
                    },
                    line,
                    span: start.to(end),
                })
            }
            _ => Err(self.err("'=', a compound assignment, '++'/'--', or a call")),
        }
    }

    fn compound(
        &mut self,
        start: Span,
        line: u32,
        target: Expr,
        op: ArithOp,
        want_semi: bool,
    ) -> Result<Stmt, ParseError> {
        self.bump();
        let rhs = self.expr()?;
        let end = rhs.span;
        if want_semi {
            self.expect_punct(Punct::Semi, "';' after assignment")?;
        }
        let span = start.to(end);
        let value = Expr {
            kind: ExprKind::Binary {
                op: BinaryOp::Arith(op),
                lhs: Box::new(target.clone()),
                rhs: Box::new(rhs),
            },
            line,
            span,
            ty: None,
        };
        Ok(Stmt {
            kind: StmtKind::Assign { target, value },
            line,
            span,
        })
    }

    // -- expressions ---------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn binary_chain(
        &mut self,
        sub: fn(&mut Self) -> Result<Expr, ParseError>,
        table: &[(Op, BinaryOp)],
    ) -> Result<Expr, ParseError> {
        let mut lhs = sub(self)?;
        'outer: loop {
            for (tok, op) in table {
                if self.peek().kind == TokenKind::Op(*tok) {
                    self.bump();
                    let rhs = sub(self)?;
                    let span = lhs.span.to(rhs.span);
                    let line = lhs.line;
                    lhs = Expr {
                        kind: ExprKind::Binary {
                            op: *op,
                            lhs: Box::new(lhs),
                            rhs: Box::new(rhs),
                        },
                        line,
                        span,
                        ty: None,
                    };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::and_expr, &[(Op::OrOr, BinaryOp::Or)])
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::cmp_expr, &[(Op::AndAnd, BinaryOp::And)])
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(
            Self::add_expr,
            &[
                (Op::Lt, BinaryOp::Cmp(CmpOp::Lt)),
                (Op::Le, BinaryOp::Cmp(CmpOp::Le)),
                (Op::Gt, BinaryOp::Cmp(CmpOp::Gt)),
                (Op::Ge, BinaryOp::Cmp(CmpOp::Ge)),
                (Op::EqEq, BinaryOp::Cmp(CmpOp::Eq)),
                (Op::NotEq, BinaryOp::Cmp(CmpOp::Ne)),
            ],
        )
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(
            Self::mul_expr,
            &[
                (Op::Plus, BinaryOp::Arith(ArithOp::Add)),
                (Op::Minus, BinaryOp::Arith(ArithOp::Sub)),
            ],
        )
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(
            Self::unary_expr,
            &[
                (Op::Star, BinaryOp::Arith(ArithOp::Mul)),
                (Op::Slash, BinaryOp::Arith(ArithOp::Div)),
                (Op::Percent, BinaryOp::Arith(ArithOp::Mod)),
            ],
        )
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.peek().span;
        let line = self.peek().pos.line;
        let op = match self.peek().kind {
            TokenKind::Op(Op::Minus) => Some(UnaryOp::Neg),
            TokenKind::Op(Op::Not) => Some(UnaryOp::Not),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary_expr()?;
            let span = start.to(operand.span);
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                line,
                span,
                ty: None,
            });
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary_expr()?;
        loop {
            match self.peek().kind {
                TokenKind::Punct(Punct::LBracket) => {
                    self.bump();
                    let index = self.expr()?;
                    let end = self.peek().span;
                    self.expect_punct(Punct::RBracket, "']' closing index")?;
                    let span = e.span.to(end);
                    let line = e.line;
                    e = Expr {
                        kind: ExprKind::Index {
                            base: Box::new(e),
                            index: Box::new(index),
                        },
                        line,
                        span,
                        ty: None,
                    };
                }
                TokenKind::Punct(Punct::Dot) => {
                    self.bump();
                    let (field, _, fspan) = self.ident("member name")?;
                    let span = e.span.to(fspan);
                    let line = e.line;
                    e = Expr {
                        kind: ExprKind::Member {
                            base: Box::new(e),
                            field,
                        },
                        line,
                        span,
                        ty: None,
                    };
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Int(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Int(v.clone()),
                    line: t.pos.line,
                    span: t.span,
                    ty: None,
                })
            }
            TokenKind::Str(s) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Str(s.clone()),
                    line: t.pos.line,
                    span: t.span,
                    ty: None,
                })
            }
            TokenKind::Keyword(Keyword::True) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Bool(true),
                    line: t.pos.line,
                    span: t.span,
                    ty: None,
                })
            }
            TokenKind::Keyword(Keyword::False) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Bool(false),
                    line: t.pos.line,
                    span: t.span,
                    ty: None,
                })
            }
            TokenKind::Keyword(Keyword::Payable) => {
                self.bump();
                self.expect_punct(Punct::LParen, "'(' after payable")?;
                let inner = self.expr()?;
                let end = self.peek().span;
                self.expect_punct(Punct::RParen, "')' closing payable")?;
                Ok(Expr {
                    kind: ExprKind::PayableCast(Box::new(inner)),
                    line: t.pos.line,
                    span: t.span.to(end),
                    ty: None,
                })
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Ident(name.clone()),
                    line: t.pos.line,
                    span: t.span,
                    ty: None,
                })
            }
            TokenKind::Punct(Punct::LParen) => {
                self.bump();
                let mut inner = self.expr()?;
                let end = self.peek().span;
                self.expect_punct(Punct::RParen, "')'")?;
                // keep the parenthesized span so source text stays faithful
                inner.span = t.span.to(end);
                Ok(inner)
            }
            _ => Err(self.err("an expression")),
        }
    }
}

/// `uint`/`uintN`/`int`/`intN` with N in 8..=256 step 8.
fn int_type(name: &str) -> Option<MiniSolType> {
    let (unsigned, rest) = if let Some(rest) = name.strip_prefix("uint") {
        (true, rest)
    } else if let Some(rest) = name.strip_prefix("int") {
        (false, rest)
    } else {
        return None;
    };
    let bits = if rest.is_empty() {
        256
    } else {
        match rest.parse::<u16>() {
            Ok(b) if (8..=256).contains(&b) && b % 8 == 0 => b,
            _ => return None,
        }
    };
    Some(if unsigned {
        MiniSolType::UInt(bits)
    } else {
        MiniSolType::Int(bits)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::tokenize;

    fn parse(src: &str) -> ContractAst {
        parse_contract(&tokenize(src).unwrap()).unwrap()
    }

    const MAGIC: &str = r#"
contract Magic {
    function magicNumber(uint x) pure external returns(uint) {
        uint index=0;
        uint value=x;
        require(x<15);
        while(index<x)
            {
            if(index%2==0)
                {
                    value=value*2;
                }
                else
                {
                    value=value*3;
                }
                x=x+1;
            }
            return value;
    }
}
"#;

    #[test]
    fn magic_number_listing() {
        let c = parse(MAGIC);
        let f = c.function("magicNumber").unwrap();
        assert_eq!(f.params.len(), 1);
        assert_eq!(f.mutability, Mutability::Pure);
        assert_eq!(f.returns, Some(MiniSolType::uint()));
        // 2 declarations, require, while, return at top level
        assert_eq!(f.body.len(), 5);
        match &f.body[3].kind {
            StmtKind::While { body, .. } => {
                assert_eq!(body.len(), 2); // if/else + x=x+1
                assert!(matches!(body[0].kind, StmtKind::If { .. }));
            }
            other => panic!("expected while, got {other:?}"),
        }
    }

    #[test]
    fn empty_contract() {
        let c = parse("contract C {}");
        assert_eq!(c.name, "C");
        assert!(c.functions.is_empty());
        assert!(c.state_vars.is_empty());
    }

    #[test]
    fn deposit_contract_listing() {
        let src = r#"
pragma solidity 0.8.23;
contract DepositContract {
    mapping(address=>uint) public deposits;
    function deposit() public payable {
        require(msg.value > 0);
        deposits[msg.sender]=deposits[msg.sender]+msg.value;
    }
    function withdraw() public payable {
        require(deposits[msg.sender] > 0);
        payable(msg.sender).transfer(deposits[msg.sender]);
        assert(deposits[msg.sender] == 0);
    }
}
"#;
        let c = parse(src);
        assert_eq!(c.name, "DepositContract");
        assert_eq!(c.pragma.as_deref(), Some("solidity 0.8.23"));
        assert_eq!(c.functions.len(), 2);
        assert_eq!(c.functions[0].name, "deposit");
        assert_eq!(c.functions[1].name, "withdraw");
        assert_eq!(
            c.state_vars[0].ty,
            MiniSolType::Mapping {
                key: Box::new(MiniSolType::Address),
                value: Box::new(MiniSolType::uint()),
            }
        );
        let w = c.function("withdraw").unwrap();
        assert!(matches!(w.body[1].kind, StmtKind::Builtin { ref name, .. } if name == "transfer"));
    }

    #[test]
    fn parse_error_reports_line_and_expectation() {
        let toks = tokenize("contract C {\n  function f( {\n}").unwrap();
        let err = parse_contract(&toks).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.expected.contains("type"), "{err}");
    }

    #[test]
    fn statement_lines_match_source() {
        let c = parse(MAGIC);
        let f = c.function("magicNumber").unwrap();
        let lines: Vec<u32> = f.body.iter().map(|s| s.line).collect();
        assert_eq!(lines, vec![4, 5, 6, 7, 19]);
    }

    #[test]
    fn for_loop_and_compound_assign() {
        let src = r#"
contract C {
    uint total;
    function f(uint n) public {
        for (uint i = 0; i < n; i++) {
            total += i;
        }
    }
}
"#;
        let c = parse(src);
        let f = c.function("f").unwrap();
        match &f.body[0].kind {
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                assert!(matches!(init.kind, StmtKind::VarDecl { .. }));
                assert!(matches!(cond.kind, ExprKind::Binary { .. }));
                assert!(matches!(step.kind, StmtKind::Assign { .. }));
                assert_eq!(body.len(), 1);
            }
            other => panic!("expected for, got {other:?}"),
        }
    }

    #[test]
    fn condition_source_text_is_exact() {
        let src = "contract C { function f(uint x) public { require(x<15); } }";
        let c = parse(src);
        let f = c.function("f").unwrap();
        match &f.body[0].kind {
            StmtKind::Require(cond) => assert_eq!(cond.source_text(src), "x<15"),
            other => panic!("expected require, got {other:?}"),
        }
    }

    #[test]
    fn pretty_print_round_trips() {
        for src in [
            MAGIC,
            "contract C {}",
            r#"
contract B {
    mapping(uint=>uint) public bidders;
    uint[3] private slots;
    struct Entry { uint amount; bool live; }
    function bid(uint n) public payable {
        require(msg.value>10);
        uint newBid=bidders[n]+msg.value;
        if(newBid>10) { bidders[n]=newBid; } else { revert("Insufficient bid"); }
    }
}
"#,
        ] {
            let once = parse(src);
            let printed = pretty_print(&once);
            let twice = parse_contract(&tokenize(&printed).unwrap())
                .unwrap_or_else(|e| panic!("re-parse failed: {e}\n{printed}"));
            assert_eq!(pretty_print(&twice), printed);
        }
    }
}
