//! Text form of expressions.
//!
//! Rendering is fully parenthesized: every binary application is wrapped in
//! parentheses and unary operators use call syntax, e.g.
//! `((inv(r) + -0.9995) * dx)`. Constants are written in the shortest
//! decimal form that reads back to the same `f64`.
//!
//! Parsing is more forgiving: the usual precedence (`*` over `+`/`-`, left
//! associative) applies, so `r*r*r + 0.08` is accepted as well.
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := primary ("*" primary)*
//! primary := number | "-" number | unary "(" sum ")" | variable | "(" sum ")"
//! ```

use std::fmt::Write;

use super::{BinaryOp, Expr, UnaryOp};
use crate::error::{Error, Result};

pub fn render(expr: &Expr) -> String {
    render_with_names(expr, &[] as &[&str])
}

/// Renders with column names; indices without a name fall back to `x<i>`.
pub fn render_with_names<S: AsRef<str>>(expr: &Expr, names: &[S]) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, names);
    out
}

fn write_expr<S: AsRef<str>>(out: &mut String, expr: &Expr, names: &[S]) {
    match expr {
        Expr::Const(c) => write_const(out, *c),
        Expr::Var(i) => match names.get(*i) {
            Some(n) => out.push_str(n.as_ref()),
            None => {
                let _ = write!(out, "x{i}");
            }
        },
        Expr::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_expr(out, a, names);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            out.push('(');
            write_expr(out, a, names);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, b, names);
            out.push(')');
        }
    }
}

fn write_const(out: &mut String, c: f64) {
    // `Display` for f64 is the shortest round-tripping decimal, never exponent form.
    let _ = write!(out, "{c}");
}

pub fn parse(text: &str) -> Result<Expr> {
    parse_with_names(text, &[] as &[&str])
}

/// Parses `text`, resolving identifiers against `names` first and then the
/// `x<i>` convention.
pub fn parse_with_names<S: AsRef<str>>(text: &str, names: &[S]) -> Result<Expr> {
    let mut p = Parser {
        src: text,
        pos: 0,
        names,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a, S> {
    src: &'a str,
    pos: usize,
    names: &'a [S],
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn error(&self, expected: &str) -> Error {
        let found = self.src[self.pos..]
            .chars()
            .take(8)
            .collect::<String>();
        let expected = if found.is_empty() {
            format!("{expected}, found end of input")
        } else {
            format!("{expected}, found `{found}`")
        };
        Error::Parse {
            offset: self.pos,
            expected,
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinaryOp::Add,
                Some('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.primary()?;
        while self.eat('*') {
            let rhs = self.primary()?;
            lhs = Expr::mul(lhs, rhs);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('-') => {
                let start = self.pos;
                self.pos += 1;
                match self.src[self.pos..].chars().next() {
                    Some(c) if c.is_ascii_digit() || c == '.' => {
                        let v = self.number()?;
                        Ok(Expr::Const(-v))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error("a number after `-`"))
                    }
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_alphabetic() || c == '_' => self.identifier(),
            _ => Err(self.error("a number, variable, function or `(`")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i > s
        };
        let int = digits(&mut i);
        let mut frac = false;
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            frac = digits(&mut i);
        }
        if !int && !frac {
            return Err(self.error("a decimal number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) {
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text.parse().map_err(|_| self.error("a decimal number"))?;
        if !v.is_finite() {
            return Err(self.error("a finite constant"));
        }
        self.pos = i;
        Ok(v)
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        let ident = &rest[..len];
        self.pos += len;

        if let Some(op) = UnaryOp::ALL.iter().find(|u| u.name() == ident) {
            if self.peek() == Some('(') {
                self.pos += 1;
                let arg = self.sum()?;
                self.expect(')')?;
                return Ok(Expr::unary(*op, arg));
            }
        }
        if let Some(i) = self.names.iter().position(|n| n.as_ref() == ident) {
            return Ok(Expr::Var(i));
        }
        if UnaryOp::ALL.iter().any(|u| u.name() == ident) {
            self.skip_ws();
            return Err(self.error(&format!("`(` after `{ident}`")));
        }
        if let Some(i) = ident
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
        {
            return Ok(Expr::Var(i));
        }
        self.pos = start;
        Err(self.error("a known variable or function"))
    }
}
