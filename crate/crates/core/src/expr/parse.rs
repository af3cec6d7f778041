//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'* power
//! power  := atom ('^' int)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Multiplication is never implicit. `pi` and `e` are literal constants.

use std::fmt;

use thiserror::Error;

use super::{Expr, UnaryOp, Var};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    /// `offset` is a 1-based byte offset into the source text.
    #[error("syntax error at offset {offset}: found {found}, expected {}", ExpectedList(.expected))]
    Syntax { offset: usize, found: String, expected: Vec<&'static str> },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("invalid number `{text}` at offset {offset}")]
    InvalidNumber { text: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::InvalidNumber { offset, .. } => *offset,
        }
    }
}

struct ExpectedList<'a>(&'a [&'static str]);

impl fmt::Display for ExpectedList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            [] => f.write_str("nothing"),
            [one] => f.write_str(one),
            many => {
                f.write_str("one of ")?;
                for (i, e) in many.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(e)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) => write!(f, "number `{s}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const ATOM_START: &[&str] = &["number", "identifier", "function", "`(`", "`-`"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    // Returns the token and its 0-based start offset.
    fn next(&mut self) -> Result<(Tok<'a>, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::Eof, start));
        };
        self.pos += 1;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                self.pos = start;
                Tok::Num(self.number())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                Tok::Ident(&self.src[start..self.pos])
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start + 1,
                    found: format!("character `{ch}`"),
                    expected: ATOM_START.to_vec(),
                });
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self) -> &'a str {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let digits = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            // only consume an exponent if digits actually follow
            let mut p = self.pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if p < bytes.len() && bytes[p].is_ascii_digit() {
                digits(&mut p);
                self.pos = p;
            }
        }
        &self.src[start..self.pos]
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok<'a>,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, tok_start) = lexer.next()?;
        Ok(Parser { lexer, tok, tok_start })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, start) = self.lexer.next()?;
        self.tok = tok;
        self.tok_start = start;
        Ok(())
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax { offset: self.tok_start + 1, found: self.tok.to_string(), expected: expected.to_vec() }
    }

    fn expect(&mut self, tok: Tok<'static>, name: &'static str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.bump()
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let ctor: fn(Expr, Expr) -> Expr = match self.tok {
                Tok::Plus => Expr::add,
                Tok::Minus => Expr::sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = ctor(lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let ctor: fn(Expr, Expr) -> Expr = match self.tok {
                Tok::Star => Expr::mul,
                Tok::Slash => Expr::div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.factor()?;
            lhs = ctor(lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut negations = 0usize;
        while self.tok == Tok::Minus {
            negations += 1;
            self.bump()?;
        }
        let mut e = self.power()?;
        for _ in 0..negations {
            e = Expr::neg(e);
        }
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let start = self.tok_start;
        let negative = if self.tok == Tok::Minus {
            self.bump()?;
            true
        } else {
            false
        };
        let Tok::Num(text) = self.tok else {
            return Err(self.error(&["integer exponent"]));
        };
        if !text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseError::Syntax {
                offset: self.tok_start + 1,
                found: format!("number `{text}`"),
                expected: vec!["integer exponent"],
            });
        }
        let magnitude: i64 =
            text.parse().map_err(|_| ParseError::InvalidNumber { text: text.to_string(), offset: start + 1 })?;
        let n = if negative { -magnitude } else { magnitude };
        let n = i32::try_from(n).map_err(|_| ParseError::InvalidNumber { text: n.to_string(), offset: start + 1 })?;
        self.bump()?;
        Ok(Expr::pow(base, n))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(text) => {
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::InvalidNumber { text: text.to_string(), offset: self.tok_start + 1 })?;
                self.bump()?;
                Ok(Expr::lit(v))
            }
            Tok::Ident(name) => {
                let offset = self.tok_start + 1;
                if let Some(op) = UnaryOp::function(name) {
                    self.bump()?;
                    self.expect(Tok::LParen, "`(`")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::unary(op, arg));
                }
                let e = match name {
                    "pi" => Expr::lit(std::f64::consts::PI),
                    "e" => Expr::lit(std::f64::consts::E),
                    _ => match Var::from_name(name) {
                        Some(v) => Expr::var(v),
                        None => {
                            return Err(ParseError::UnknownIdentifier { name: name.to_string(), offset });
                        }
                    },
                };
                self.bump()?;
                Ok(e)
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.error(&ATOM_START[..4])),
        }
    }
}

/// Parse an expression from text.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::Eof {
        return Err(p.error(&["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"]));
    }
    Ok(e)
}
