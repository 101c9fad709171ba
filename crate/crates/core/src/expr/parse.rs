//! Lexer and recursive-descent parser for the map-definition format:
//!
//! ```text
//! file     := "dim" INT ";" ("phi" "=" expr ";")? ("f" INDEX "=" expr ";")+
//! expr     := expr ("+" | "-") expr | expr "*" expr | expr "^" UINT | "-" expr
//!           | rational | "t" | "x" INDEX | FUNC "(" expr ")" | "(" expr ")"
//! rational := INT | INT "/" POSINT
//! ```
//!
//! `#` starts a comment running to the end of the line.
//! `t` is only legal inside the phi definition. A minus sign directly in
//! front of a literal (not raised to a power) folds into a negative constant.

use num_bigint::BigInt;
use num_traits::Signed;

use super::{Expr, ExprMap, Func, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits")),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                column: tc,
            });
            continue;
        }
        if "+-*^/()=;[]{},".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                column: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Syntax {
            line: tl,
            column: tc,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

/// Which variables an expression may mention.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Scope {
    /// `x1..xn`.
    Map(usize),
    /// Only `t`.
    Phi,
}

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.tokens[self.pos];
        Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn is_sym(&self, c: char) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == c)
    }

    pub(crate) fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    pub(crate) fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    pub(crate) fn expect_ident(&mut self, name: &str) -> Result<()> {
        if self.is_ident(name) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{name}'"))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    pub(crate) fn uint(&mut self) -> Result<usize> {
        match self.peek().clone() {
            Tok::Int(n) => match usize::try_from(&n) {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error("integer too large"),
            },
            _ => self.error("expected integer"),
        }
    }

    pub(crate) fn expr(&mut self, scope: Scope) -> Result<Expr> {
        let first = self.product(scope)?;
        let mut terms = vec![first];
        loop {
            if self.is_sym('+') {
                self.bump();
                terms.push(self.product(scope)?);
            } else if self.is_sym('-') {
                self.bump();
                terms.push(Expr::Neg(Box::new(self.product(scope)?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn product(&mut self, scope: Scope) -> Result<Expr> {
        let mut factors = vec![self.unary(scope)?];
        while self.is_sym('*') {
            self.bump();
            factors.push(self.unary(scope)?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Prod(factors)
        })
    }

    fn unary(&mut self, scope: Scope) -> Result<Expr> {
        if !self.is_sym('-') {
            return self.power(scope);
        }
        if let Tok::Int(_) = self.peek_at(1) {
            let after = if matches!(self.peek_at(2), Tok::Sym('/')) { 4 } else { 2 };
            if !matches!(self.peek_at(after), Tok::Sym('^')) {
                self.bump();
                let lit = self.literal()?;
                return Ok(Expr::Const(-lit));
            }
        }
        self.bump();
        Ok(Expr::Neg(Box::new(self.unary(scope)?)))
    }

    fn power(&mut self, scope: Scope) -> Result<Expr> {
        let base = self.atom(scope)?;
        if self.is_sym('^') {
            self.bump();
            let e = self.uint()?;
            let e = u32::try_from(e).or_else(|_| self.error("exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn literal(&mut self) -> Result<Rational> {
        let n = match self.peek().clone() {
            Tok::Int(n) => n,
            _ => return self.error("expected number"),
        };
        self.bump();
        if self.is_sym('/') {
            self.bump();
            let d = match self.peek().clone() {
                Tok::Int(d) if d.is_positive() => d,
                Tok::Int(_) => return self.error("denominator must be positive"),
                _ => return self.error("expected denominator"),
            };
            self.bump();
            return Ok(Rational::new(n, d));
        }
        Ok(Rational::from_integer(n))
    }

    fn atom(&mut self, scope: Scope) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Const(self.literal()?)),
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr(scope)?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = parse_func(&name) {
                    if matches!(scope, Scope::Phi) && matches!(func, Func::Phi(_)) {
                        return self.error("phi cannot refer to itself");
                    }
                    self.bump();
                    self.expect_sym('(')?;
                    let arg = self.expr(scope)?;
                    self.expect_sym(')')?;
                    return Ok(Expr::Func(func, Box::new(arg)));
                }
                if name == "t" {
                    return match scope {
                        Scope::Phi => {
                            self.bump();
                            Ok(Expr::Var(0))
                        }
                        Scope::Map(_) => self.error("'t' is only legal inside the phi definition"),
                    };
                }
                if let Some(index) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    return match scope {
                        Scope::Map(n) if index >= 1 && index <= n => {
                            self.bump();
                            Ok(Expr::Var(index - 1))
                        }
                        Scope::Map(n) => {
                            self.error(format!("variable {name} out of range for dimension {n}"))
                        }
                        Scope::Phi => self.error("only 't' may appear in the phi definition"),
                    };
                }
                self.error(format!("unknown identifier '{name}'"))
            }
            _ => self.error("expected expression"),
        }
    }
}

fn parse_func(name: &str) -> Option<Func> {
    match name {
        "sin" => Some(Func::Sin),
        "cos" => Some(Func::Cos),
        "exp" => Some(Func::Exp),
        _ => {
            let primes = name.strip_prefix("phi")?;
            primes
                .chars()
                .all(|c| c == '\'')
                .then_some(Func::Phi(primes.len() as u32))
        }
    }
}

/// Parses a complete map definition.
pub fn parse_map(text: &str) -> Result<ExprMap> {
    let mut p = Parser::new(text)?;
    p.expect_ident("dim")?;
    let dim = p.uint()?;
    if dim == 0 {
        return p.error("dimension must be positive");
    }
    p.expect_sym(';')?;
    let phi = parse_optional_phi(&mut p)?;
    let mut components: Vec<Option<Expr>> = vec![None; dim];
    while !p.at_eof() {
        let name = p.ident()?;
        let index = match name.strip_prefix('f').and_then(|d| d.parse::<usize>().ok()) {
            Some(i) if i >= 1 && i <= dim => i - 1,
            _ => {
                p.pos -= 1;
                return p.error(format!("expected component name f1..f{dim}, found '{name}'"));
            }
        };
        if components[index].is_some() {
            p.pos -= 1;
            return p.error(format!("component {name} defined twice"));
        }
        p.expect_sym('=')?;
        components[index] = Some(p.expr(Scope::Map(dim))?);
        if !p.at_eof() {
            p.expect_sym(';')?;
        }
    }
    let mut comps = Vec::with_capacity(dim);
    for (i, c) in components.into_iter().enumerate() {
        match c {
            Some(e) => comps.push(e),
            None => return p.error(format!("missing component f{}", i + 1)),
        }
    }
    ExprMap::new(comps, phi)
}

pub(crate) fn parse_optional_phi(p: &mut Parser) -> Result<Option<Expr>> {
    if p.is_ident("phi") && matches!(p.peek_at(1), Tok::Sym('=')) {
        p.bump();
        p.bump();
        let def = p.expr(Scope::Phi)?;
        p.expect_sym(';')?;
        return Ok(Some(def));
    }
    Ok(None)
}

/// Parses a standalone phi definition such as `-t^2`.
pub fn parse_phi(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr(Scope::Phi)?;
    if !p.at_eof() {
        return p.error("trailing input");
    }
    Ok(e)
}
