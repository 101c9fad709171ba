//! New Class perturbations built recursively from recipes.
//!
//! A level-`i` map has live variables `v = (x_1..x_i)` and parameters
//! `z = (x_{i+1}..x_n)`:
//!
//! ```text
//! h(v, z) = (M^a(z) h~(M(z) v, z) + eta(z), 0)
//! ```
//!
//! where `h~` is a level `i-1` map, `M` is an `i x i` matrix of parameter
//! functions, `M^a` its classical adjoint, and `eta` a parameter-only offset.
//! At level 1 the map is `(h_1, 0, ..., 0)` with `h_1` independent of `x_1`.

mod format;
mod random;
mod verify;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprMap, Poly, PolyMap, Rational};
use crate::matrix::{Matrix, Ring};

pub use format::parse_recipe;
pub use random::random_recipe;
pub use verify::{
    invert, invert_exact, verify_claims, verify_claims_numeric, ClaimsReport, LevelReport, NumericClaimsReport,
};

#[derive(Clone, Debug, PartialEq)]
pub enum RecipeNode {
    Base {
        h: Expr,
    },
    Lift {
        m: Matrix<Expr>,
        offset: Vec<Expr>,
        inner: Box<RecipeNode>,
    },
}

impl RecipeNode {
    pub fn level(&self) -> usize {
        match self {
            RecipeNode::Base { .. } => 1,
            RecipeNode::Lift { m, .. } => m.rows(),
        }
    }

    fn entries(&self) -> Vec<&Expr> {
        match self {
            RecipeNode::Base { h } => vec![h],
            RecipeNode::Lift { m, offset, inner } => {
                let mut out: Vec<&Expr> = m.entries().chain(offset.iter()).collect();
                out.extend(inner.entries());
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewClassRecipe {
    dim: usize,
    phi: Option<Expr>,
    root: RecipeNode,
}

fn var_label(i: usize) -> String {
    format!("x{}", i + 1)
}

fn check_entry(e: &Expr, dim: usize, live: usize, what: impl Fn() -> String) -> Result<()> {
    if let Some(v) = e.max_var() {
        if v >= dim {
            return Err(Error::VariableOutOfRange { index: v, dim });
        }
    }
    if let Some(v) = (0..live).find(|&v| e.depends_on(v)) {
        return Err(Error::Dependence(format!(
            "{} depends on live variable {}",
            what(),
            var_label(v)
        )));
    }
    Ok(())
}

fn check_node(node: &RecipeNode, dim: usize) -> Result<()> {
    match node {
        RecipeNode::Base { h } => check_entry(h, dim, 1, || "level 1 h".to_string()),
        RecipeNode::Lift { m, offset, inner } => {
            let i = m.rows();
            if !m.is_square() || i < 2 || i > dim {
                return Err(Error::Precondition(format!(
                    "level matrix must be square of size 2..={dim}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            if offset.len() != i {
                return Err(Error::DimensionMismatch { expected: i, found: offset.len() });
            }
            if inner.level() + 1 != i {
                return Err(Error::Precondition(format!(
                    "level {i} must wrap a level {} recipe, found level {}",
                    i - 1,
                    inner.level()
                )));
            }
            for r in 0..i {
                for c in 0..i {
                    check_entry(m.get(r, c), dim, i, || format!("level {i} M[{}][{}]", r + 1, c + 1))?;
                }
                check_entry(&offset[r], dim, i, || format!("level {i} C[{}]", r + 1))?;
            }
            check_node(inner, dim)
        }
    }
}

/// Ring elements that support variable substitution, so one recursion
/// serves both expression trees and canonical polynomials.
trait Entry: Ring {
    fn variable(i: usize) -> Self;
    fn subst(&self, images: &[Self]) -> Self;
}

impl Entry for Expr {
    fn variable(i: usize) -> Self {
        Expr::Var(i)
    }
    fn subst(&self, images: &[Self]) -> Self {
        self.substitute(images)
    }
}

impl Entry for Poly {
    fn variable(i: usize) -> Self {
        Poly::var(i)
    }
    fn subst(&self, images: &[Self]) -> Self {
        self.substitute(images)
    }
}

/// Components of the map at every level, innermost first.
fn build_levels<T: Entry>(
    node: &RecipeNode,
    dim: usize,
    conv: &dyn Fn(&Expr) -> Result<T>,
    out: &mut Vec<Vec<T>>,
) -> Result<()> {
    let comps = match node {
        RecipeNode::Base { h } => {
            let mut c = vec![T::ring_zero(); dim];
            c[0] = conv(h)?;
            c
        }
        RecipeNode::Lift { m, offset, inner } => {
            build_levels(inner, dim, conv, out)?;
            let ht = out.last().expect("inner level built").clone();
            let i = m.rows();
            let mm = m.try_map(|e| conv(e))?;
            let images: Vec<T> = (0..dim)
                .map(|k| {
                    if k < i {
                        let mut acc = T::ring_zero();
                        for j in 0..i {
                            acc = acc.plus(&mm.get(k, j).times(&T::variable(j)));
                        }
                        acc
                    } else {
                        T::variable(k)
                    }
                })
                .collect();
            let inner_at: Vec<T> = ht[..i].iter().map(|c| c.subst(&images)).collect();
            let adj = mm.classical_adjoint();
            let mut c = vec![T::ring_zero(); dim];
            for (k, slot) in c.iter_mut().enumerate().take(i) {
                let mut acc = conv(&offset[k])?;
                for (j, val) in inner_at.iter().enumerate() {
                    if !val.is_ring_zero() {
                        acc = acc.plus(&adj.get(k, j).times(val));
                    }
                }
                *slot = acc;
            }
            c
        }
    };
    out.push(comps);
    Ok(())
}

impl NewClassRecipe {
    pub fn new(dim: usize, phi: Option<Expr>, root: RecipeNode) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        if let Some(def) = &phi {
            if def.max_var().is_some_and(|v| v > 0) || def.contains_phi() {
                return Err(Error::Precondition("phi must be a function of t alone".into()));
            }
        }
        check_node(&root, dim)?;
        Ok(NewClassRecipe { dim, phi, root })
    }

    /// The zero perturbation at level `level`.
    pub fn trivial(dim: usize, level: usize) -> Self {
        let mut r = NewClassRecipe { dim, phi: None, root: RecipeNode::Base { h: Expr::zero() } };
        r.lift_to(level);
        r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.root.level()
    }

    pub fn phi(&self) -> Option<&Expr> {
        self.phi.as_ref()
    }

    pub fn root(&self) -> &RecipeNode {
        &self.root
    }

    pub fn is_polynomial(&self) -> bool {
        let entries = self.root.entries();
        !entries.iter().any(|e| e.contains_transcendental())
            && (!entries.iter().any(|e| e.contains_phi())
                || self.phi.as_ref().is_some_and(|d| !d.contains_transcendental()))
    }

    /// The perturbation `h` as an expression map with `phi` attached.
    pub fn build(&self) -> Result<ExprMap> {
        let mut levels = Vec::new();
        build_levels(&self.root, self.dim, &|e: &Expr| Ok(e.clone()), &mut levels)?;
        ExprMap::new(levels.pop().expect("at least one level"), self.phi.clone())
    }

    fn poly_levels(&self) -> Result<Vec<PolyMap>> {
        let phi = self.phi.as_ref().map(|d| d.to_poly(None)).transpose()?;
        let mut levels = Vec::new();
        build_levels(&self.root, self.dim, &|e: &Expr| e.to_poly(phi.as_ref()), &mut levels)?;
        levels.into_iter().map(PolyMap::new).collect()
    }

    /// The perturbation `h` in canonical polynomial form.
    pub fn build_poly(&self) -> Result<PolyMap> {
        Ok(self.poly_levels()?.pop().expect("at least one level"))
    }

    /// `f = id + h`.
    pub fn build_map(&self) -> Result<ExprMap> {
        let h = self.build()?;
        ExprMap::identity(self.dim).add(&h)
    }

    /// Wraps the root in identity levels (`M = I`, `C = 0`) up to `level`.
    pub fn lift_to(&mut self, level: usize) {
        assert!(level <= self.dim, "cannot lift past the dimension");
        while self.root.level() < level {
            let i = self.root.level() + 1;
            let inner = std::mem::replace(&mut self.root, RecipeNode::Base { h: Expr::zero() });
            self.root = RecipeNode::Lift {
                m: Matrix::identity(i),
                offset: vec![Expr::zero(); i],
                inner: Box::new(inner),
            };
        }
    }

    /// Recipe for `r h`.
    pub fn scale(&self, r: &Rational) -> NewClassRecipe {
        fn go(node: &RecipeNode, c: &Expr) -> RecipeNode {
            match node {
                RecipeNode::Base { h } => RecipeNode::Base { h: Expr::mul(c.clone(), h.clone()) },
                RecipeNode::Lift { m, offset, inner } => RecipeNode::Lift {
                    m: m.clone(),
                    offset: offset.iter().map(|e| Expr::mul(c.clone(), e.clone())).collect(),
                    inner: Box::new(go(inner, c)),
                },
            }
        }
        NewClassRecipe {
            dim: self.dim,
            phi: self.phi.clone(),
            root: go(&self.root, &Expr::Const(r.clone())),
        }
    }

    /// Recipe for `T^a ∘ h ∘ T` with `T` a constant linear map.
    pub fn conjugate(&self, t: &Matrix<Rational>) -> Result<NewClassRecipe> {
        if t.rows() != self.dim || !t.is_square() {
            return Err(Error::DimensionMismatch { expected: self.dim, found: t.rows() });
        }
        let mut out = self.clone();
        out.lift_to(self.dim);
        let te = t.map(|c| Expr::Const(c.clone()));
        let ta = te.classical_adjoint();
        if let RecipeNode::Lift { m, offset, .. } = &mut out.root {
            *m = m.mul(&te);
            *offset = ta.mul_vec(offset);
        } else {
            // dim 1: T = [t], T^a = [1], and h(x) = h_1 is constant.
            debug_assert_eq!(self.dim, 1);
        }
        Ok(out)
    }

    /// Recipe for `h + C` with `C` constant.
    pub fn offset(&self, c: &[Rational]) -> Result<NewClassRecipe> {
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: c.len() });
        }
        let mut out = self.clone();
        out.lift_to(self.dim);
        match &mut out.root {
            RecipeNode::Lift { offset, .. } => {
                for (o, ci) in offset.iter_mut().zip(c) {
                    if !ci.is_zero() {
                        *o = Expr::add(o.clone(), Expr::Const(ci.clone()));
                    }
                }
            }
            RecipeNode::Base { h } => *h = Expr::add(h.clone(), Expr::Const(c[0].clone())),
        }
        Ok(out)
    }

    /// Recipe for `h ∘ (delta(z) v + eps(z), z)`, where `v` are the live
    /// variables of the root level and `delta`, `eps` depend only on its
    /// parameters.
    pub fn affine_reparameterize(&self, delta: &Expr, eps: &[Expr]) -> Result<NewClassRecipe> {
        let i = self.level();
        if eps.len() != i {
            return Err(Error::DimensionMismatch { expected: i, found: eps.len() });
        }
        check_entry(delta, self.dim, i, || "delta".to_string())?;
        for (k, e) in eps.iter().enumerate() {
            check_entry(e, self.dim, i, || format!("eps[{}]", k + 1))?;
        }
        let images: Vec<Expr> = (0..self.dim)
            .map(|k| if k < i { affine(delta, k, &eps[k]) } else { Expr::Var(k) })
            .collect();
        let root = precompose(&self.root, &images, delta, eps);
        NewClassRecipe::new(self.dim, self.phi.clone(), root)
    }
}

fn affine(delta: &Expr, k: usize, shift: &Expr) -> Expr {
    Expr::add(Expr::mul(delta.clone(), Expr::Var(k)), shift.clone())
}

/// Precomposes a level-`i` node with `(delta v + eps, pi(z))`, where
/// `images[k]` is `delta x_k + eps_k` for `k < i` and `pi_k` otherwise.
/// With `M' = M ∘ pi` the inner map becomes `h~(delta w + M' eps, pi(z))`,
/// which has the same shape one level down.
fn precompose(node: &RecipeNode, images: &[Expr], delta: &Expr, eps: &[Expr]) -> RecipeNode {
    match node {
        RecipeNode::Base { h } => RecipeNode::Base { h: h.substitute(images) },
        RecipeNode::Lift { m, offset, inner } => {
            let i = m.rows();
            let m2 = m.map(|e| e.substitute(images));
            let offset2 = offset.iter().map(|e| e.substitute(images)).collect();
            let gamma = m2.mul_vec(eps);
            let inner_images: Vec<Expr> = (0..images.len())
                .map(|k| if k < i { affine(delta, k, &gamma[k]) } else { images[k].clone() })
                .collect();
            RecipeNode::Lift {
                m: m2,
                offset: offset2,
                inner: Box::new(precompose(inner, &inner_images, delta, &gamma[..i - 1])),
            }
        }
    }
}

/// The recipe reproducing the three-dimensional example
/// `h = (z phi(x + z y), -phi(x + z y), 0)`.
pub fn example3_recipe(phi: Expr) -> NewClassRecipe {
    let m = Matrix::from_rows(vec![
        vec![Expr::one(), Expr::zero()],
        vec![Expr::one(), Expr::Var(2)],
    ]);
    let root = RecipeNode::Lift {
        m,
        offset: vec![Expr::zero(), Expr::zero()],
        inner: Box::new(RecipeNode::Base { h: Expr::phi(Expr::Var(1)) }),
    };
    NewClassRecipe::new(3, Some(phi), root).expect("fixed recipe is valid")
}

/// Planar recipe producing `h = (b phi(a x + b y) + c, -a phi(a x + b y) + d)`.
pub fn planar_recipe(a: &Rational, b: &Rational, c: &Rational, d: &Rational, phi: Expr) -> NewClassRecipe {
    let m = Matrix::from_rows(vec![
        vec![Expr::one(), Expr::zero()],
        vec![Expr::Const(a.clone()), Expr::Const(b.clone())],
    ]);
    let root = RecipeNode::Lift {
        m,
        offset: vec![Expr::Const(c.clone()), Expr::Const(d.clone())],
        inner: Box::new(RecipeNode::Base { h: Expr::phi(Expr::Var(1)) }),
    };
    NewClassRecipe::new(2, Some(phi), root).expect("fixed recipe is valid")
}

#[cfg(test)]
mod tests;
