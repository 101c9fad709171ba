//! Text format for recipes:
//!
//! ```text
//! dim 3;
//! phi = -t^2;
//! level 2 {
//!   M = [[1, 0], [1, x3]];
//!   C = [0, 0];
//!   level 1 { h = phi(x2); }
//! }
//! ```
//!
//! `C` is optional and defaults to zero. Each `level i` block other than
//! level 1 holds an `i x i` matrix and exactly one `level i-1` block.

use super::{NewClassRecipe, RecipeNode};
use crate::error::Result;
use crate::expr::{parse_optional_phi, Expr, Parser, Scope};
use crate::matrix::Matrix;

fn vector(p: &mut Parser, dim: usize) -> Result<Vec<Expr>> {
    p.expect_sym('[')?;
    let mut out = vec![p.expr(Scope::Map(dim))?];
    while p.is_sym(',') {
        p.expect_sym(',')?;
        out.push(p.expr(Scope::Map(dim))?);
    }
    p.expect_sym(']')?;
    Ok(out)
}

fn matrix(p: &mut Parser, dim: usize) -> Result<Vec<Vec<Expr>>> {
    p.expect_sym('[')?;
    let mut rows = vec![vector(p, dim)?];
    while p.is_sym(',') {
        p.expect_sym(',')?;
        rows.push(vector(p, dim)?);
    }
    p.expect_sym(']')?;
    Ok(rows)
}

fn level(p: &mut Parser, dim: usize, expected: Option<usize>) -> Result<RecipeNode> {
    p.expect_ident("level")?;
    let i = p.uint()?;
    if let Some(e) = expected {
        if i != e {
            return p.error(format!("expected level {e}, found level {i}"));
        }
    }
    if i == 0 || i > dim {
        return p.error(format!("level must lie in 1..={dim}"));
    }
    p.expect_sym('{')?;
    let node = if i == 1 {
        p.expect_ident("h")?;
        p.expect_sym('=')?;
        let h = p.expr(Scope::Map(dim))?;
        p.expect_sym(';')?;
        RecipeNode::Base { h }
    } else {
        p.expect_ident("M")?;
        p.expect_sym('=')?;
        let rows = matrix(p, dim)?;
        if rows.len() != i || rows.iter().any(|r| r.len() != i) {
            return p.error(format!("level {i} needs a {i}x{i} matrix"));
        }
        p.expect_sym(';')?;
        let offset = if p.is_ident("C") {
            p.expect_ident("C")?;
            p.expect_sym('=')?;
            let c = vector(p, dim)?;
            if c.len() != i {
                return p.error(format!("level {i} needs an offset of length {i}"));
            }
            p.expect_sym(';')?;
            c
        } else {
            vec![Expr::zero(); i]
        };
        let inner = level(p, dim, Some(i - 1))?;
        RecipeNode::Lift { m: Matrix::from_rows(rows), offset, inner: Box::new(inner) }
    };
    p.expect_sym('}')?;
    if p.is_sym(';') {
        p.expect_sym(';')?;
    }
    Ok(node)
}

pub fn parse_recipe(text: &str) -> Result<NewClassRecipe> {
    let mut p = Parser::new(text)?;
    p.expect_ident("dim")?;
    let dim = p.uint()?;
    if dim == 0 {
        return p.error("dimension must be positive");
    }
    p.expect_sym(';')?;
    let phi = parse_optional_phi(&mut p)?;
    let root = level(&mut p, dim, None)?;
    if !p.at_eof() {
        return p.error("trailing input after the outermost level");
    }
    NewClassRecipe::new(dim, phi, root)
}

fn var(i: usize) -> String {
    format!("x{}", i + 1)
}

fn render_node(node: &RecipeNode, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match node {
        RecipeNode::Base { h } => {
            out.push_str(&format!("{pad}level 1 {{ h = {}; }}\n", h.render_with(&var)));
        }
        RecipeNode::Lift { m, offset, inner } => {
            let rows: Vec<String> = m
                .to_rows()
                .iter()
                .map(|r| format!("[{}]", r.iter().map(|e| e.render_with(&var)).collect::<Vec<_>>().join(", ")))
                .collect();
            let c: Vec<String> = offset.iter().map(|e| e.render_with(&var)).collect();
            out.push_str(&format!("{pad}level {} {{\n", m.rows()));
            out.push_str(&format!("{pad}  M = [{}];\n", rows.join(", ")));
            out.push_str(&format!("{pad}  C = [{}];\n", c.join(", ")));
            render_node(inner, indent + 1, out);
            out.push_str(&format!("{pad}}}\n"));
        }
    }
}

impl NewClassRecipe {
    /// Source text accepted by [`parse_recipe`].
    pub fn render(&self) -> String {
        let mut out = format!("dim {};\n", self.dim);
        if let Some(def) = &self.phi {
            out.push_str(&format!("phi = {};\n", def.render_with(&|_| "t".to_string())));
        }
        render_node(&self.root, 0, &mut out);
        out
    }
}
