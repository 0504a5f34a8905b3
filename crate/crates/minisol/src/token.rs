//! Lexer for the MiniSol subset.

use std::fmt;

use num_bigint::BigInt;

use crate::source::{Pos, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Int(BigInt),
    Str(String),
    /// Everything after `pragma` up to the semicolon, kept verbatim.
    PragmaBody(String),
    Op(Op),
    Punct(Punct),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Contract,
    Function,
    Struct,
    Mapping,
    Returns,
    Return,
    If,
    Else,
    While,
    For,
    Require,
    Assert,
    Revert,
    Pragma,
    True,
    False,
    Bool,
    Address,
    Public,
    Private,
    Internal,
    External,
    Pure,
    View,
    Payable,
    Memory,
    Storage,
    Calldata,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    PercentAssign,
    PlusPlus,
    MinusMinus,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Not,
    Arrow, // => in mapping types
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Punct {
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub pos: Pos,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lex error at {line}:{column}: unexpected character '{ch}'")]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub ch: char,
}

/// Integer-width type names (`uint`, `uint8`..`uint256`, `int`, ...) are
/// lexed as identifiers and resolved by the parser; only structural words
/// are keywords.
fn keyword(word: &str) -> Option<Keyword> {
    use Keyword::*;
    Some(match word {
        "contract" => Contract,
        "function" => Function,
        "struct" => Struct,
        "mapping" => Mapping,
        "returns" => Returns,
        "return" => Return,
        "if" => If,
        "else" => Else,
        "while" => While,
        "for" => For,
        "require" => Require,
        "assert" => Assert,
        "revert" => Revert,
        "pragma" => Pragma,
        "true" => True,
        "false" => False,
        "bool" => Bool,
        "address" => Address,
        "public" => Public,
        "private" => Private,
        "internal" => Internal,
        "external" => External,
        "pure" => Pure,
        "view" => View,
        "payable" => Payable,
        "memory" => Memory,
        "storage" => Storage,
        "calldata" => Calldata,
        _ => return None,
    })
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        src: source,
        bytes: source.as_bytes(),
        at: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        if lx.at >= lx.bytes.len() {
            let pos = Pos::new(lx.line, lx.col);
            out.push(Token {
                kind: TokenKind::Eof,
                lexeme: String::new(),
                pos,
                span: Span::new(lx.at, lx.at),
            });
            return Ok(out);
        }
        let tok = lx.next_token()?;
        let is_pragma = matches!(tok.kind, TokenKind::Keyword(Keyword::Pragma));
        out.push(tok);
        if is_pragma {
            if let Some(t) = lx.pragma_body() {
                out.push(t);
            }
        }
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.at).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.bytes.get(self.at + 1).copied()
    }

    fn bump(&mut self) -> u8 {
        let b = self.bytes[self.at];
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    self.bump();
                    self.bump();
                    while self.at < self.bytes.len() {
                        if self.peek() == Some(b'*') && self.peek2() == Some(b'/') {
                            self.bump();
                            self.bump();
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    /// After `pragma`, swallow everything up to (not including) the `;`.
    fn pragma_body(&mut self) -> Option<Token> {
        self.skip_trivia();
        let start = self.at;
        let pos = Pos::new(self.line, self.col);
        while let Some(b) = self.peek() {
            if b == b';' {
                break;
            }
            self.bump();
        }
        if self.at == start {
            return None;
        }
        let text = self.src[start..self.at].trim().to_string();
        Some(Token {
            kind: TokenKind::PragmaBody(text.clone()),
            lexeme: text,
            pos,
            span: Span::new(start, self.at),
        })
    }

    fn next_token(&mut self) -> Result<Token, LexError> {
        let start = self.at;
        let pos = Pos::new(self.line, self.col);
        let b = self.peek().unwrap();

        let kind = if b.is_ascii_alphabetic() || b == b'_' {
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == b'_' {
                    self.bump();
                } else {
                    break;
                }
            }
            let word = &self.src[start..self.at];
            match keyword(word) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident(word.to_string()),
            }
        } else if b.is_ascii_digit() {
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    self.bump();
                } else {
                    break;
                }
            }
            let digits = &self.src[start..self.at];
            TokenKind::Int(digits.parse::<BigInt>().expect("digits"))
        } else if b == b'"' {
            self.bump();
            let lit_start = self.at;
            while let Some(c) = self.peek() {
                if c == b'"' {
                    break;
                }
                self.bump();
            }
            let text = self.src[lit_start..self.at].to_string();
            if self.peek() == Some(b'"') {
                self.bump();
            } else {
                return Err(LexError {
                    line: pos.line,
                    column: pos.column,
                    ch: '"',
                });
            }
            TokenKind::Str(text)
        } else {
            self.bump();
            let two = |lx: &Lexer| lx.peek();
            use Op::*;
            use Punct::*;
            match b {
                b'=' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(EqEq)
                    }
                    Some(b'>') => {
                        self.bump();
                        TokenKind::Op(Arrow)
                    }
                    _ => TokenKind::Op(Assign),
                },
                b'+' => match two(self) {
                    Some(b'+') => {
                        self.bump();
                        TokenKind::Op(PlusPlus)
                    }
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(PlusAssign)
                    }
                    _ => TokenKind::Op(Plus),
                },
                b'-' => match two(self) {
                    Some(b'-') => {
                        self.bump();
                        TokenKind::Op(MinusMinus)
                    }
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(MinusAssign)
                    }
                    _ => TokenKind::Op(Minus),
                },
                b'*' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(StarAssign)
                    }
                    _ => TokenKind::Op(Star),
                },
                b'/' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(SlashAssign)
                    }
                    _ => TokenKind::Op(Slash),
                },
                b'%' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(PercentAssign)
                    }
                    _ => TokenKind::Op(Percent),
                },
                b'<' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(Le)
                    }
                    _ => TokenKind::Op(Lt),
                },
                b'>' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(Ge)
                    }
                    _ => TokenKind::Op(Gt),
                },
                b'!' => match two(self) {
                    Some(b'=') => {
                        self.bump();
                        TokenKind::Op(NotEq)
                    }
                    _ => TokenKind::Op(Not),
                },
                b'&' if two(self) == Some(b'&') => {
                    self.bump();
                    TokenKind::Op(AndAnd)
                }
                b'|' if two(self) == Some(b'|') => {
                    self.bump();
                    TokenKind::Op(OrOr)
                }
                b'(' => TokenKind::Punct(LParen),
                b')' => TokenKind::Punct(RParen),
                b'{' => TokenKind::Punct(LBrace),
                b'}' => TokenKind::Punct(RBrace),
                b'[' => TokenKind::Punct(LBracket),
                b']' => TokenKind::Punct(RBracket),
                b';' => TokenKind::Punct(Semi),
                b',' => TokenKind::Punct(Comma),
                b'.' => TokenKind::Punct(Dot),
                other => {
                    return Err(LexError {
                        line: pos.line,
                        column: pos.column,
                        ch: other as char,
                    })
                }
            }
        };

        Ok(Token {
            kind,
            lexeme: self.src[start..self.at].to_string(),
            pos,
            span: Span::new(start, self.at),
        })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lexeme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .filter(|k| !matches!(k, TokenKind::Eof))
            .collect()
    }

    #[test]
    fn declaration_tokens() {
        let ks = kinds("uint index=0;");
        assert_eq!(
            ks,
            vec![
                TokenKind::Ident("uint".into()),
                TokenKind::Ident("index".into()),
                TokenKind::Op(Op::Assign),
                TokenKind::Int(0.into()),
                TokenKind::Punct(Punct::Semi),
            ]
        );
    }

    #[test]
    fn require_tokens() {
        let ks = kinds("require(x<15);");
        assert_eq!(
            ks,
            vec![
                TokenKind::Keyword(Keyword::Require),
                TokenKind::Punct(Punct::LParen),
                TokenKind::Ident("x".into()),
                TokenKind::Op(Op::Lt),
                TokenKind::Int(15.into()),
                TokenKind::Punct(Punct::RParen),
                TokenKind::Punct(Punct::Semi),
            ]
        );
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("uint @x;").unwrap_err();
        assert_eq!(err.ch, '@');
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 6);
    }

    #[test]
    fn lexemes_reproduce_source() {
        let src = "contract C { function f(uint a) public { a = a + 1; } }";
        let toks = tokenize(src).unwrap();
        let squashed: String = toks.iter().map(|t| t.lexeme.as_str()).collect();
        let expected: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(squashed, expected);
    }

    #[test]
    fn comments_and_pragma() {
        let toks = tokenize("pragma solidity 0.8.23;\n// note\nuint x; /* b */ bool y;").unwrap();
        assert!(matches!(toks[0].kind, TokenKind::Keyword(Keyword::Pragma)));
        assert!(matches!(&toks[1].kind, TokenKind::PragmaBody(b) if b == "solidity 0.8.23"));
        assert!(toks.iter().any(|t| matches!(&t.kind, TokenKind::Ident(i) if i == "x")));
        assert!(toks.iter().any(|t| matches!(t.kind, TokenKind::Keyword(Keyword::Bool))));
    }

    #[test]
    fn string_literal() {
        let toks = tokenize("revert(\"no bid\");").unwrap();
        assert!(matches!(&toks[2].kind, TokenKind::Str(s) if s == "no bid"));
    }
}
