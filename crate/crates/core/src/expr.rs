//! Expression language for scalar functions of n real variables.
//!
//! A small recursive-descent parser and interpreter; expressions carry the
//! objective and every constraint function. Precedence is
//! `^` > unary `-` > `* /` > `+ -`, so `-x1^2` reads as `-(x1^2)`.
//! Exponents are nonnegative integer literals.

use std::fmt;

use thiserror::Error;

/// AST node. Variables are positional indices into the evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
}

/// A parsed scalar function of `arity` real variables.
///
/// Immutable after construction; evaluation is pure, so values can be shared
/// freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownIdentifier(String),
    BadExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnknownIdentifier(n) => write!(f, "unknown identifier `{n}`"),
            ParseErrorKind::BadExponent => {
                write!(f, "exponent must be a nonnegative integer literal")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: {kind}")]
pub struct ParseError {
    /// Byte offset into the input; `len` marks end-of-input errors.
    pub position: usize,
    pub kind: ParseErrorKind,
}

/// Evaluation failure. Division by zero is reported explicitly rather than
/// leaking a non-finite value into downstream numerics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite value encountered")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, raw: String },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let raw = &src[start..i];
                let value: f64 = raw.parse().map_err(|_| ParseError {
                    position: start,
                    kind: ParseErrorKind::UnexpectedToken(raw.to_string()),
                })?;
                toks.push((
                    start,
                    Tok::Num {
                        value,
                        raw: raw.to_string(),
                    },
                ));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    kind: ParseErrorKind::UnexpectedToken(
                        src[i..].chars().next().unwrap().to_string(),
                    ),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
    vars: Vec<&'a str>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let position = self.peek().map(|(p, _)| *p).unwrap_or(self.end);
        ParseError { position, kind }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some((p, t)) => ParseError {
                position: *p,
                kind: ParseErrorKind::UnexpectedToken(tok_text(t)),
            },
            None => ParseError {
                position: self.end,
                kind: ParseErrorKind::UnexpectedEnd,
            },
        }
    }

    fn eat(&mut self, want: &Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some((_, t)) if t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((_, Tok::Plus)) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Some((_, Tok::Minus)) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some((_, Tok::Slash)) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Node::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Some((_, Tok::Minus)) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let mut base = self.atom()?;
        while let Some((_, Tok::Caret)) = self.peek() {
            self.pos += 1;
            let exp = match self.peek() {
                Some((_, Tok::Num { raw, .. })) => {
                    if raw.bytes().all(|b| b.is_ascii_digit()) {
                        raw.parse::<u32>()
                            .map_err(|_| self.err_here(ParseErrorKind::BadExponent))?
                    } else {
                        return Err(self.err_here(ParseErrorKind::BadExponent));
                    }
                }
                Some(_) => return Err(self.err_here(ParseErrorKind::BadExponent)),
                None => return Err(self.unexpected()),
            };
            self.pos += 1;
            base = Node::Pow(Box::new(base), exp);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some((_, Tok::Num { value, .. })) => {
                let v = *value;
                self.pos += 1;
                Ok(Node::Const(v))
            }
            Some((_, Tok::LParen)) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.eat(&Tok::RParen)?;
                Ok(inner)
            }
            Some((p, Tok::Ident(name))) => {
                let p = *p;
                let name = name.clone();
                self.pos += 1;
                match name.as_str() {
                    "sin" | "cos" | "exp" => {
                        self.eat(&Tok::LParen)?;
                        let arg = self.expr()?;
                        self.eat(&Tok::RParen)?;
                        Ok(match name.as_str() {
                            "sin" => Node::Sin(Box::new(arg)),
                            "cos" => Node::Cos(Box::new(arg)),
                            _ => Node::Exp(Box::new(arg)),
                        })
                    }
                    _ => match self.vars.iter().position(|v| *v == name) {
                        Some(i) => Ok(Node::Var(i)),
                        None => Err(ParseError {
                            position: p,
                            kind: ParseErrorKind::UnknownIdentifier(name),
                        }),
                    },
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num { raw, .. } => raw.clone(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
    }
}

/// Parse `text` against an ordered variable name list. `sin`, `cos` and
/// `exp` are reserved function names.
///
/// Panics if the variable names are not distinct identifiers.
pub fn parse<S: AsRef<str>>(text: &str, variables: &[S]) -> Result<Expr, ParseError> {
    let vars: Vec<&str> = variables.iter().map(|s| s.as_ref()).collect();
    for (i, a) in vars.iter().enumerate() {
        assert!(
            !vars[..i].contains(a),
            "variable names must be distinct, `{a}` repeats"
        );
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        vars,
    };
    let root = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(Expr {
        root,
        arity: variables.len(),
    })
}

/// Default positional variable names `x1..xn`.
pub fn default_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl Expr {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub(crate) fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluate at `point`; length must equal the arity.
    pub fn eval(&self, point: &[f64]) -> Result<f64, DomainError> {
        assert_eq!(
            point.len(),
            self.arity,
            "point length must equal expression arity"
        );
        eval_node(&self.root, point)
    }
}

fn eval_node(n: &Node, x: &[f64]) -> Result<f64, DomainError> {
    let v = match n {
        Node::Const(c) => *c,
        Node::Var(i) => x[*i],
        Node::Neg(a) => -eval_node(a, x)?,
        Node::Add(a, b) => eval_node(a, x)? + eval_node(b, x)?,
        Node::Sub(a, b) => eval_node(a, x)? - eval_node(b, x)?,
        Node::Mul(a, b) => eval_node(a, x)? * eval_node(b, x)?,
        Node::Div(a, b) => {
            let d = eval_node(b, x)?;
            if d == 0.0 {
                return Err(DomainError::DivisionByZero);
            }
            eval_node(a, x)? / d
        }
        Node::Pow(a, e) => eval_node(a, x)?.powi(*e as i32),
        Node::Sin(a) => eval_node(a, x)?.sin(),
        Node::Cos(a) => eval_node(a, x)?.cos(),
        Node::Exp(a) => eval_node(a, x)?.exp(),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainError::NonFinite)
    }
}

// Printing uses just enough parentheses that `parse(print(e))` evaluates
// bit-identically to `e`.
fn prec(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Const(c) if c.is_sign_negative() => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_node(n: &Node, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = prec(n) < min;
    if wrap {
        write!(f, "(")?;
    }
    match n {
        Node::Const(c) => write!(f, "{c}")?,
        Node::Var(i) => write!(f, "x{}", i + 1)?,
        Node::Neg(a) => {
            write!(f, "-")?;
            fmt_node(a, 3, f)?;
        }
        Node::Add(a, b) => {
            fmt_node(a, 1, f)?;
            write!(f, " + ")?;
            fmt_node(b, 2, f)?;
        }
        Node::Sub(a, b) => {
            fmt_node(a, 1, f)?;
            write!(f, " - ")?;
            fmt_node(b, 2, f)?;
        }
        Node::Mul(a, b) => {
            fmt_node(a, 2, f)?;
            write!(f, "*")?;
            fmt_node(b, 3, f)?;
        }
        Node::Div(a, b) => {
            fmt_node(a, 2, f)?;
            write!(f, "/")?;
            fmt_node(b, 3, f)?;
        }
        Node::Pow(a, e) => {
            fmt_node(a, 5, f)?;
            write!(f, "^{e}")?;
        }
        Node::Sin(a) => {
            write!(f, "sin(")?;
            fmt_node(a, 0, f)?;
            write!(f, ")")?;
        }
        Node::Cos(a) => {
            write!(f, "cos(")?;
            fmt_node(a, 0, f)?;
            write!(f, ")")?;
        }
        Node::Exp(a) => {
            write!(f, "exp(")?;
            fmt_node(a, 0, f)?;
            write!(f, ")")?;
        }
    }
    if wrap {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    /// Renders with default positional names `x1..xn`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, 0, f)
    }
}
