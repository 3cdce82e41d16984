//! Text syntax for expressions and differential requests.
//!
//! ```text
//! request := 'D' '[' int (',' int)* ']' expr '@' ident
//!          | expr ('@' ident)?
//! expr    := term ('+' term)*
//! term    := comp ('*' comp)*
//! comp    := postfix ('o' comp)?
//! postfix := primary ('(' args ')')*
//! primary := number | '-' primary | ident | 'e'int | 'exp' | 'pow[' int ']'
//!          | 'lin[' ident ']' | '(' expr ')' | diff
//! diff    := 'D' ['^' int] ident '(' args ';' dir (',' dir)* ')'
//! dir     := [int ':'] expr
//! ```
//!
//! Integers and `a/b` are exact; literals with `.` or an exponent are floats.
//! A bare identifier is a point in argument position and a function in
//! composition position. Elsewhere it is a point when it names a declared
//! point and a univariate function otherwise.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::canon::{canonicalize, sort_of, Sort};
use crate::diff::{nth_chain_diff, DiffError};
use crate::expr::{DiffTerm, Expr, ExprError, Scalar, SlotDirection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: power exponent must be a positive integer, found `{found}`")]
    InvalidPower {
        line: usize,
        column: usize,
        found: String,
    },
    #[error(transparent)]
    Structure(#[from] ExprError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// A parsed top-level input.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    /// A plain expression, optionally anchored at a point with `@`.
    Expr { expr: Expr, point: Option<String> },
    /// `D[i1,...,in] expr @ x`.
    Differential {
        expr: Expr,
        point: String,
        directions: Vec<u32>,
    },
}

impl Request {
    /// Canonical expression, or the canonical differential for a request.
    pub fn evaluate(&self) -> Result<Expr, DslError> {
        match self {
            Request::Expr { expr, .. } => Ok(canonicalize(expr)?),
            Request::Differential {
                expr,
                point,
                directions,
            } => Ok(nth_chain_diff(expr, point, directions)?),
        }
    }
}

pub const DEFAULT_POINTS: &[&str] = &["x"];

/// Parses an expression or differential request and returns its canonical form.
pub fn parse(text: &str) -> Result<Expr, DslError> {
    parse_request(text, DEFAULT_POINTS)?.evaluate()
}

/// Parses an expression (no `D[...]`/`@`) into canonical form.
pub fn parse_expr(text: &str, points: &[&str]) -> Result<Expr, DslError> {
    Ok(canonicalize(&parse_raw(text, points)?)?)
}

/// Parses an expression without canonicalizing it. The result is sort-checked.
pub fn parse_raw(text: &str, points: &[&str]) -> Result<Expr, DslError> {
    let mut p = Parser::new(text)?;
    let raw = p.expr()?;
    p.expect_end()?;
    let points = points.iter().map(|s| s.to_string()).collect();
    let e = resolve(&raw, Ctx::Unknown, &points);
    sort_of(&e)?;
    Ok(e)
}

/// Parses a top-level request.
pub fn parse_request(text: &str, points: &[&str]) -> Result<Request, DslError> {
    let mut p = Parser::new(text)?;
    let directions = if p.peek_is(&Tok::Ident("D".into())) && p.peek_nth_is(1, &Tok::LBracket) {
        p.advance();
        p.advance();
        let mut dirs = vec![p.integer("direction index")?];
        while p.eat(&Tok::Comma) {
            dirs.push(p.integer("direction index")?);
        }
        p.expect(&Tok::RBracket, "`]`")?;
        Some(
            dirs.into_iter()
                .map(|d| u32::try_from(d).map_err(|_| p.error_here("direction index too large")))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let raw = p.expr()?;
    let point = if p.eat(&Tok::At) {
        Some(p.ident("point name")?)
    } else {
        None
    };
    p.expect_end()?;
    let mut declared: BTreeSet<String> = points.iter().map(|s| s.to_string()).collect();
    declared.extend(point.iter().cloned());
    let expr = resolve(&raw, Ctx::Unknown, &declared);
    let sort = sort_of(&expr)?;
    match directions {
        Some(directions) => {
            let point = point.ok_or_else(|| p.error_here("a differential request needs `@ point`"))?;
            Ok(Request::Differential {
                expr,
                point,
                directions,
            })
        }
        None => {
            let expr = match (&point, sort) {
                (Some(x), Sort::Function(1)) => Expr::call(expr, Expr::point(x.clone())),
                _ => expr,
            };
            Ok(Request::Expr { expr, point })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Float(f64, String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    At,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Float(_, s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::At => "@",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> DslError {
    DslError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            let digits = |i: &mut usize| {
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    *i += 1;
                }
            };
            digits(&mut i);
            let mut float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                float = true;
                i += 1;
                digits(&mut i);
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    float = true;
                    i = j;
                    digits(&mut i);
                }
            }
            let s: String = chars[start..i].iter().collect();
            if float {
                let v = f64::from_str(&s).map_err(|_| syntax(pos, format!("invalid number `{s}`")))?;
                Tok::Float(v, s)
            } else {
                Tok::Int(BigInt::from_str(&s).map_err(|_| syntax(pos, format!("invalid number `{s}`")))?)
            }
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '@' => Tok::At,
                other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column: col }));
    Ok(out)
}

/// Parsed syntax before identifiers are resolved to points or functions.
#[derive(Debug, Clone)]
enum Raw {
    Num(Scalar),
    Ident(String),
    Dir(u32),
    Exp,
    Pow(u32),
    Lin(String),
    Sum(Vec<Raw>),
    Product(Vec<Raw>),
    Compose(Box<Raw>, Box<Raw>),
    Apply(Box<Raw>, Vec<Raw>),
    Diff {
        name: String,
        base: Vec<Raw>,
        dirs: Vec<(usize, Raw)>,
    },
}

const RESERVED: &[&str] = &["exp", "pow", "lin", "o"];

fn direction_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('e')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, DslError> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn peek_is(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn peek_nth_is(&self, n: usize, t: &Tok) -> bool {
        self.toks.get(self.at + n).is_some_and(|(tok, _)| tok == t)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek_is(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>) -> DslError {
        syntax(self.pos(), message)
    }

    fn unexpected(&self, wanted: &str) -> DslError {
        self.error_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: &Tok, wanted: &str) -> Result<(), DslError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_end(&self) -> Result<(), DslError> {
        if self.peek_is(&Tok::End) {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn integer(&mut self, what: &str) -> Result<u64, DslError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = u64::try_from(&n).map_err(|_| self.error_here(format!("{what} too large")))?;
                self.advance();
                Ok(v)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn expr(&mut self) -> Result<Raw, DslError> {
        let mut terms = vec![self.term()?];
        while self.eat(&Tok::Plus) {
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Raw::Sum(terms) })
    }

    fn term(&mut self) -> Result<Raw, DslError> {
        let mut factors = vec![self.comp()?];
        while self.eat(&Tok::Star) {
            factors.push(self.comp()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Raw::Product(factors)
        })
    }

    fn comp(&mut self) -> Result<Raw, DslError> {
        let outer = self.postfix()?;
        if self.eat(&Tok::Ident("o".into())) {
            Ok(Raw::Compose(Box::new(outer), Box::new(self.comp()?)))
        } else {
            Ok(outer)
        }
    }

    fn postfix(&mut self) -> Result<Raw, DslError> {
        let start = self.pos();
        let head = self.primary()?;
        if let Raw::Ident(name) = &head {
            if self.peek_is(&Tok::LParen) {
                let (args, dirs) = self.arguments()?;
                if let Some(dirs) = dirs {
                    return Self::diff_from_ident(name, args, dirs, start);
                }
                return self.more_applications(Raw::Apply(Box::new(head), args));
            }
        }
        self.more_applications(head)
    }

    fn more_applications(&mut self, mut head: Raw) -> Result<Raw, DslError> {
        while self.peek_is(&Tok::LParen) {
            let at = self.pos();
            let (args, dirs) = self.arguments()?;
            if dirs.is_some() {
                return Err(syntax(at, "`;` is only allowed in differential terms such as `Df(x;e1)`"));
            }
            head = Raw::Apply(Box::new(head), args);
        }
        Ok(head)
    }

    fn diff_from_ident(
        ident: &str,
        base: Vec<Raw>,
        dirs: Vec<(usize, Raw)>,
        at: Pos,
    ) -> Result<Raw, DslError> {
        match ident.strip_prefix('D') {
            Some(name) if !name.is_empty() => Ok(Raw::Diff {
                name: name.to_string(),
                base,
                dirs,
            }),
            _ => Err(syntax(at, format!("`{ident}(...;...)` is not a differential term; write `D<name>(x;e1)`"))),
        }
    }

    /// `(` args [`;` dirs] `)`
    #[allow(clippy::type_complexity)]
    fn arguments(&mut self) -> Result<(Vec<Raw>, Option<Vec<(usize, Raw)>>), DslError> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.peek_is(&Tok::RParen) && !self.peek_is(&Tok::Semi) {
            args.push(self.expr()?);
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
        }
        let dirs = if self.eat(&Tok::Semi) {
            let mut dirs = vec![self.direction()?];
            while self.eat(&Tok::Comma) {
                dirs.push(self.direction()?);
            }
            Some(dirs)
        } else {
            None
        };
        self.expect(&Tok::RParen, "`)`")?;
        Ok((args, dirs))
    }

    fn direction(&mut self) -> Result<(usize, Raw), DslError> {
        if matches!(self.peek(), Tok::Int(_)) && self.peek_nth_is(1, &Tok::Colon) {
            let slot = self.integer("slot")? as usize;
            self.advance();
            return Ok((slot, self.expr()?));
        }
        Ok((1, self.expr()?))
    }

    fn number(&mut self, negative: bool) -> Result<Raw, DslError> {
        let sign = |v: BigInt| if negative { -v } else { v };
        match self.advance() {
            Tok::Float(v, _) => Ok(Raw::Num(Scalar::float(if negative { -v } else { v }))),
            Tok::Int(n) => {
                if self.peek_is(&Tok::Slash) {
                    self.advance();
                    let at = self.pos();
                    let Tok::Int(d) = self.advance() else {
                        return Err(syntax(at, "expected an integer denominator"));
                    };
                    if d.is_zero() {
                        return Err(syntax(at, "zero denominator"));
                    }
                    Ok(Raw::Num(Scalar::Exact(BigRational::new(sign(n), d))))
                } else {
                    Ok(Raw::Num(Scalar::Exact(BigRational::from_integer(sign(n)))))
                }
            }
            _ => unreachable!("number() called on a non-number token"),
        }
    }

    fn bracketed<T>(&mut self, what: &str, inner: impl FnOnce(&mut Self) -> Result<T, DslError>) -> Result<T, DslError> {
        self.expect(&Tok::LBracket, &format!("`[` after `{what}`"))?;
        let v = inner(self)?;
        self.expect(&Tok::RBracket, "`]`")?;
        Ok(v)
    }

    fn primary(&mut self) -> Result<Raw, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(_) | Tok::Float(..) => self.number(false),
            Tok::Minus => {
                self.advance();
                if matches!(self.peek(), Tok::Int(_) | Tok::Float(..)) {
                    self.number(true)
                } else {
                    let inner = self.postfix()?;
                    Ok(Raw::Product(vec![Raw::Num(Scalar::int(-1)), inner]))
                }
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance();
                match name.as_str() {
                    "exp" => Ok(Raw::Exp),
                    "pow" => self.bracketed("pow", |p| {
                        let at = p.pos();
                        match p.advance() {
                            Tok::Int(k) => match u32::try_from(&k) {
                                Ok(k) if k >= 1 => Ok(Raw::Pow(k)),
                                _ => Err(DslError::InvalidPower {
                                    line: at.line,
                                    column: at.column,
                                    found: k.to_string(),
                                }),
                            },
                            Tok::Float(_, s) => Err(DslError::InvalidPower {
                                line: at.line,
                                column: at.column,
                                found: s,
                            }),
                            Tok::Minus => Err(DslError::InvalidPower {
                                line: at.line,
                                column: at.column,
                                found: "a negative number".into(),
                            }),
                            other => Err(syntax(at, format!("expected an exponent, found {}", other.describe()))),
                        }
                    }),
                    "lin" => {
                        let n = self.bracketed("lin", |p| p.ident("functional name"))?;
                        Ok(Raw::Lin(n))
                    }
                    "o" => Err(syntax(pos, "`o` needs a function on its left")),
                    "D" if self.peek_is(&Tok::Caret) => {
                        self.advance();
                        let order = self.integer("differential order")? as usize;
                        let target = self.ident("function name")?;
                        let at = self.pos();
                        let (base, dirs) = self.arguments()?;
                        let dirs = dirs.ok_or_else(|| syntax(at, "differential terms need `;` before the directions"))?;
                        if dirs.len() != order {
                            return Err(syntax(pos, format!("`D^{order}` needs {order} directions, found {}", dirs.len())));
                        }
                        Ok(Raw::Diff { name: target, base, dirs })
                    }
                    _ if self.peek_is(&Tok::LBracket) => {
                        Err(syntax(pos, format!("unknown construct `{name}[...]`")))
                    }
                    _ => Ok(direction_index(&name).map_or(Raw::Ident(name), Raw::Dir)),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Value,
    Function,
    Unknown,
}

fn hint(raw: &Raw, points: &BTreeSet<String>) -> Ctx {
    match raw {
        Raw::Num(_) => Ctx::Unknown,
        Raw::Ident(n) if points.contains(n) => Ctx::Value,
        Raw::Ident(_) => Ctx::Unknown,
        Raw::Dir(_) | Raw::Apply(..) | Raw::Diff { .. } => Ctx::Value,
        Raw::Exp | Raw::Pow(_) | Raw::Lin(_) | Raw::Compose(..) => Ctx::Function,
        Raw::Sum(xs) | Raw::Product(xs) => {
            let hints: Vec<Ctx> = xs.iter().map(|x| hint(x, points)).collect();
            if hints.contains(&Ctx::Value) {
                Ctx::Value
            } else if hints.contains(&Ctx::Function) {
                Ctx::Function
            } else {
                Ctx::Unknown
            }
        }
    }
}

fn resolve(raw: &Raw, ctx: Ctx, points: &BTreeSet<String>) -> Expr {
    match raw {
        Raw::Num(s) => Expr::Scalar(s.clone()),
        Raw::Ident(name) => match ctx {
            Ctx::Value => Expr::point(name.clone()),
            Ctx::Function => Expr::func(name.clone()),
            Ctx::Unknown if points.contains(name) => Expr::point(name.clone()),
            Ctx::Unknown => Expr::func(name.clone()),
        },
        Raw::Dir(i) => Expr::Direction(*i),
        Raw::Exp => Expr::Exp,
        Raw::Pow(k) => Expr::Power(*k),
        Raw::Lin(n) => Expr::linear(n.clone()),
        Raw::Sum(xs) | Raw::Product(xs) => {
            let inner = if ctx == Ctx::Unknown { hint(raw, points) } else { ctx };
            let items = xs.iter().map(|x| resolve(x, inner, points)).collect();
            if matches!(raw, Raw::Sum(_)) {
                Expr::Sum(items)
            } else {
                Expr::Product(items)
            }
        }
        Raw::Compose(f, g) => Expr::compose(
            resolve(f, Ctx::Function, points),
            resolve(g, Ctx::Function, points),
        ),
        Raw::Apply(f, args) => {
            let callee = match f.as_ref() {
                Raw::Ident(name) => Expr::Func {
                    name: name.clone(),
                    arity: args.len(),
                },
                other => resolve(other, Ctx::Function, points),
            };
            Expr::Apply(
                Box::new(callee),
                args.iter().map(|a| resolve(a, Ctx::Value, points)).collect(),
            )
        }
        Raw::Diff { name, base, dirs } => Expr::Diff(DiffTerm {
            target: Box::new(Expr::Func {
                name: name.clone(),
                arity: base.len(),
            }),
            base: base.iter().map(|b| resolve(b, Ctx::Value, points)).collect(),
            directions: dirs
                .iter()
                .map(|(slot, d)| SlotDirection::new(*slot, resolve(d, Ctx::Value, points)))
                .collect(),
        }),
    }
}
