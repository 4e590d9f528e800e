//! A small expression language for predicates, event filters and filter
//! transforms.
//!
//! Precedence, tightest first: unary `!` `-`, then `*` `/`, then `+` `-`,
//! then comparisons (`<` `<=` `>` `>=` `==` `!=`), then `&&`, then `||`.
//! All binary operators are left-associative.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::value::{fmt_number, Value};
use crate::error::{ExprError, TypeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Lte,
    Gt,
    Gte,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt | BinaryOp::Lte | BinaryOp::Gt | BinaryOp::Gte | BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Lte => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Gte => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Value),
    Ident(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(n: f64) -> Expr {
        Expr::Literal(Value::Number(n))
    }

    pub fn ident(name: impl Into<String>) -> Expr {
        Expr::Ident(name.into())
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Conjunction of a list of expressions; `true` when empty.
    pub fn all(mut exprs: Vec<Expr>) -> Expr {
        if exprs.is_empty() {
            return Expr::Literal(Value::Bool(true));
        }
        let first = exprs.remove(0);
        exprs
            .into_iter()
            .fold(first, |acc, e| Expr::binary(BinaryOp::And, acc, e))
    }

    pub fn free_identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Ident(n) => {
                out.insert(n.clone());
            }
            Expr::Unary(_, e) => e.collect_idents(out),
            Expr::Binary(_, l, r) => {
                l.collect_idents(out);
                r.collect_idents(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => 6,
            Expr::Literal(Value::Number(n)) if n.is_sign_negative() => 6,
            _ => 7,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => match v {
                Value::Number(n) => f.write_str(&fmt_number(*n)),
                Value::String(s) => write!(f, "{}", serde_json::Value::String(s.clone())),
                Value::Timestamp(_) => write!(f, "{}", v.to_json()),
                Value::Bool(b) => write!(f, "{b}"),
                Value::Null => f.write_str("null"),
            },
            Expr::Ident(n) => f.write_str(n),
            Expr::Unary(op, e) => {
                f.write_str(match op {
                    UnaryOp::Not => "!",
                    UnaryOp::Neg => "-",
                })?;
                if e.precedence() < 6 {
                    write!(f, "({e})")
                } else {
                    write!(f, "{e}")
                }
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                if l.precedence() < p {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if r.precedence() <= p {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_expression(&s).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.char_indices().collect(),
            pos: 0,
            src,
        }
    }

    fn column(&self) -> usize {
        // 1-based character column of the next unread char.
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn err(&self, column: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            column,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ExprError> {
        let mut out = Vec::new();
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.pos += 1;
            }
            let col = self.column();
            let Some(c) = self.peek() else {
                out.push((col, Tok::End));
                return Ok(out);
            };
            let tok = if c.is_ascii_digit() || (c == '.' && self.next_is_digit()) {
                self.number()?
            } else if c.is_alphabetic() || c == '_' {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                Tok::Ident(self.slice(start, self.pos))
            } else if c == '"' || c == '\'' {
                self.string(c)?
            } else {
                self.pos += 1;
                let two = |this: &mut Self, next: char, yes: &'static str, no: Option<&'static str>| {
                    if this.peek() == Some(next) {
                        this.pos += 1;
                        Ok(Tok::Op(yes))
                    } else {
                        no.map(Tok::Op)
                            .ok_or_else(|| this.err(col, format!("unexpected character `{c}`")))
                    }
                };
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '+' => Tok::Op("+"),
                    '-' => Tok::Op("-"),
                    '*' => Tok::Op("*"),
                    '/' => Tok::Op("/"),
                    '<' => two(&mut self, '=', "<=", Some("<"))?,
                    '>' => two(&mut self, '=', ">=", Some(">"))?,
                    '=' => two(&mut self, '=', "==", None)?,
                    '!' => two(&mut self, '=', "!=", Some("!"))?,
                    '&' => two(&mut self, '&', "&&", None)?,
                    '|' => two(&mut self, '|', "||", None)?,
                    _ => return Err(self.err(col, format!("unexpected character `{c}`"))),
                }
            };
            out.push((col, tok));
        }
    }

    fn next_is_digit(&self) -> bool {
        self.chars.get(self.pos + 1).is_some_and(|&(_, c)| c.is_ascii_digit())
    }

    fn slice(&self, start: usize, end: usize) -> String {
        let b = self.chars[start].0;
        let e = self.chars.get(end).map_or(self.src.len(), |&(i, _)| i);
        self.src[b..e].to_string()
    }

    fn number(&mut self) -> Result<Tok, ExprError> {
        let col = self.column();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = self.slice(start, self.pos);
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| self.err(col, format!("invalid number `{text}`")))
    }

    fn string(&mut self, quote: char) -> Result<Tok, ExprError> {
        let col = self.column();
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err(col, "unterminated string")),
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(Tok::Str(s));
                }
                Some('\\') => {
                    self.pos += 1;
                    let esc = self.peek().ok_or_else(|| self.err(col, "unterminated string"))?;
                    s.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                    self.pos += 1;
                }
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing (precedence climbing)

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn col(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn binop(&self) -> Option<BinaryOp> {
        let Tok::Op(s) = self.peek() else { return None };
        Some(match *s {
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Lte,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Gte,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "&&" => BinaryOp::And,
            "||" => BinaryOp::Or,
            _ => return None,
        })
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(p + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Tok::Op("!") => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)))
            }
            Tok::Op("-") => {
                self.bump();
                match self.unary()? {
                    Expr::Literal(Value::Number(n)) => Ok(Expr::Literal(Value::Number(-n))),
                    e => Ok(Expr::Unary(UnaryOp::Neg, Box::new(e))),
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        match self.bump() {
            Tok::Num(n) => Ok(Expr::num(n)),
            Tok::Str(s) => Ok(Expr::Literal(Value::String(s))),
            Tok::Ident(name) => Ok(match name.as_str() {
                "true" => Expr::Literal(Value::Bool(true)),
                "false" => Expr::Literal(Value::Bool(false)),
                "null" => Expr::Literal(Value::Null),
                _ => Expr::Ident(name),
            }),
            Tok::LParen => {
                let e = self.expr(0)?;
                let col = self.col();
                match self.bump() {
                    Tok::RParen => Ok(e),
                    _ => Err(ExprError::Syntax {
                        column: col,
                        message: "expected `)`".into(),
                    }),
                }
            }
            Tok::End => Err(ExprError::Syntax {
                column: col,
                message: "unexpected end of expression".into(),
            }),
            t => Err(ExprError::Syntax {
                column: col,
                message: format!("unexpected token {}", describe(&t)),
            }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => fmt_number(*n),
        Tok::Str(s) => format!("{s:?}"),
        Tok::Ident(s) => s.clone(),
        Tok::Op(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(ExprError::Syntax {
            column: p.col(),
            message: format!("unexpected token {}", describe(t)),
        }),
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Name resolution for evaluation.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<Value>;
}

impl Env for BTreeMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl Env for HashMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl<F: Fn(&str) -> Option<Value>> Env for F {
    fn lookup(&self, name: &str) -> Option<Value> {
        self(name)
    }
}

pub fn eval_expression(expr: &Expr, env: &dyn Env) -> Result<Value, ExprError> {
    match expr {
        Expr::Literal(v) => Ok(v.clone()),
        Expr::Ident(n) => env.lookup(n).ok_or_else(|| ExprError::Unbound(n.clone())),
        Expr::Unary(op, e) => {
            let v = eval_expression(e, env)?;
            match op {
                UnaryOp::Not => Ok(Value::Bool(!as_bool(&v)?)),
                UnaryOp::Neg => match v {
                    Value::Number(n) => Ok(Value::Number(-n)),
                    other => Err(TypeError::NotNumeric(other.kind()).into()),
                },
            }
        }
        Expr::Binary(op, l, r) => match op {
            BinaryOp::And => {
                if !as_bool(&eval_expression(l, env)?)? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(as_bool(&eval_expression(r, env)?)?))
            }
            BinaryOp::Or => {
                if as_bool(&eval_expression(l, env)?)? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(as_bool(&eval_expression(r, env)?)?))
            }
            _ => {
                let a = eval_expression(l, env)?;
                let b = eval_expression(r, env)?;
                apply_binary(*op, &a, &b)
            }
        },
    }
}

/// Applies a non-logical binary operator to two evaluated operands.
pub fn apply_binary(op: BinaryOp, a: &Value, b: &Value) -> Result<Value, ExprError> {
    use std::cmp::Ordering::*;
    Ok(match op {
        BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => {
            let x = a.as_f64().ok_or(TypeError::NotNumeric(a.kind()))?;
            let y = b.as_f64().ok_or(TypeError::NotNumeric(b.kind()))?;
            let n = match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x * y,
                _ => x / y,
            };
            let ts = |v: &Value| matches!(v, Value::Timestamp(_));
            // Shifting a timestamp by a duration stays a timestamp.
            if matches!(op, BinaryOp::Add | BinaryOp::Sub) && ts(a) != ts(b) && (ts(a) || op == BinaryOp::Add) {
                Value::Timestamp(n)
            } else {
                Value::Number(n)
            }
        }
        BinaryOp::Eq => Value::Bool(a.try_eq(b)?),
        BinaryOp::Ne => Value::Bool(!a.try_eq(b)?),
        BinaryOp::Lt => Value::Bool(a.try_cmp(b)? == Less),
        BinaryOp::Lte => Value::Bool(a.try_cmp(b)? != Greater),
        BinaryOp::Gt => Value::Bool(a.try_cmp(b)? == Greater),
        BinaryOp::Gte => Value::Bool(a.try_cmp(b)? != Less),
        BinaryOp::And | BinaryOp::Or => {
            let (x, y) = (as_bool(a)?, as_bool(b)?);
            Value::Bool(if op == BinaryOp::And { x && y } else { x || y })
        }
    })
}

fn as_bool(v: &Value) -> Result<bool, ExprError> {
    v.as_bool().ok_or_else(|| TypeError::NotBoolean(v.kind()).into())
}
