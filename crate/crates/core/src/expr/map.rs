use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::expr::{Expr, Poly, Rational, Scalar, Substitution};
use crate::matrix::Matrix;

fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

fn phi_var_name(_: usize) -> String {
    "t".to_string()
}

/// A self-map of `R^n` given by expression trees, with an optional attached
/// definition for the univariate placeholder `phi` (written in `t`).
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMap {
    components: Vec<Expr>,
    phi: Option<Expr>,
}

impl ExprMap {
    pub fn new(components: Vec<Expr>, phi: Option<Expr>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for c in &components {
            if let Some(v) = c.max_var() {
                if v >= dim {
                    return Err(Error::VariableOutOfRange { index: v, dim });
                }
            }
        }
        if let Some(def) = &phi {
            if let Some(v) = def.max_var() {
                if v > 0 {
                    return Err(Error::VariableOutOfRange { index: v, dim: 1 });
                }
            }
            if def.contains_phi() {
                return Err(Error::Precondition("phi definition may not refer to phi".into()));
            }
        }
        Ok(ExprMap { components, phi })
    }

    pub fn identity(dim: usize) -> Self {
        ExprMap {
            components: (0..dim).map(Expr::Var).collect(),
            phi: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn phi(&self) -> Option<&Expr> {
        self.phi.as_ref()
    }

    pub fn with_phi(mut self, phi: Option<Expr>) -> Result<Self> {
        self.phi = phi;
        ExprMap::new(self.components, self.phi)
    }

    pub fn uses_phi(&self) -> bool {
        self.components.iter().any(Expr::contains_phi)
    }

    pub fn is_polynomial(&self) -> bool {
        !self.components.iter().any(Expr::contains_transcendental)
            && (!self.uses_phi()
                || self.phi.as_ref().is_some_and(|d| !d.contains_transcendental()))
    }

    fn check_point_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            });
        }
        Ok(())
    }

    pub fn evaluate<S: Scalar>(&self, point: &[S]) -> Result<Vec<S>> {
        self.check_point_len(point.len())?;
        self.components
            .iter()
            .map(|c| c.eval(point, self.phi.as_ref()))
            .collect()
    }

    fn merged_phi(&self, other: &ExprMap) -> Result<Option<Expr>> {
        match (&self.phi, &other.phi) {
            (Some(a), Some(b)) if a != b => Err(Error::ConflictingPhi),
            (Some(a), _) => Ok(Some(a.clone())),
            (None, b) => Ok(b.clone()),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ExprMap) -> Result<ExprMap> {
        self.check_point_len(inner.dim())?;
        let phi = self.merged_phi(inner)?;
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect();
        Ok(ExprMap { components, phi })
    }

    pub fn jacobian(&self) -> Matrix<Expr> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.components[i].differentiate(j))
    }

    pub fn jacobian_at<S: Scalar>(&self, point: &[S]) -> Result<Matrix<S>> {
        self.check_point_len(point.len())?;
        eval_matrix(&self.jacobian(), point, self.phi.as_ref())
    }

    pub fn to_poly(&self) -> Result<PolyMap> {
        let phi = match &self.phi {
            Some(def) => Some(def.to_poly(None)?),
            None => None,
        };
        let comps = self
            .components
            .iter()
            .map(|c| c.to_poly(phi.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(comps)
    }

    /// `self - id`.
    pub fn perturbation(&self) -> ExprMap {
        ExprMap {
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| Expr::sub(c.clone(), Expr::Var(i)))
                .collect(),
            phi: self.phi.clone(),
        }
    }

    pub fn add(&self, other: &ExprMap) -> Result<ExprMap> {
        self.zip(other, Expr::add)
    }

    pub fn sub(&self, other: &ExprMap) -> Result<ExprMap> {
        self.zip(other, Expr::sub)
    }

    fn zip(&self, other: &ExprMap, op: fn(Expr, Expr) -> Expr) -> Result<ExprMap> {
        self.check_point_len(other.dim())?;
        let phi = self.merged_phi(other)?;
        Ok(ExprMap {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| op(a.clone(), b.clone()))
                .collect(),
            phi,
        })
    }

    pub fn negated(&self) -> ExprMap {
        ExprMap {
            components: self.components.iter().cloned().map(Expr::negate).collect(),
            phi: self.phi.clone(),
        }
    }

    /// Source text accepted by [`parse_map`](crate::expr::parse_map).
    pub fn render(&self) -> String {
        let mut out = format!("dim {};\n", self.dim());
        if let Some(def) = &self.phi {
            out.push_str(&format!("phi = {};\n", def.render_with(&phi_var_name)));
        }
        for (i, c) in self.components.iter().enumerate() {
            out.push_str(&format!("f{} = {};\n", i + 1, c.render_with(&var_name)));
        }
        out
    }
}

impl fmt::Display for ExprMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub(crate) fn eval_matrix<S: Scalar>(
    m: &Matrix<Expr>,
    point: &[S],
    phi: Option<&Expr>,
) -> Result<Matrix<S>> {
    m.try_map(|e| e.eval(point, phi))
}

/// A polynomial self-map of `R^n` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMap {
    components: Vec<Poly>,
}

impl PolyMap {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for c in &components {
            let a = c.arity();
            if a > dim {
                return Err(Error::VariableOutOfRange { index: a - 1, dim });
            }
        }
        Ok(PolyMap { components })
    }

    pub fn identity(dim: usize) -> Self {
        PolyMap {
            components: (0..dim).map(Poly::var).collect(),
        }
    }

    pub fn constant(values: &[Rational]) -> Self {
        PolyMap {
            components: values.iter().cloned().map(Poly::constant).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        PolyMap {
            components: vec![Poly::zero(); dim],
        }
    }

    /// `x -> A x`.
    pub fn linear(a: &Matrix<Rational>) -> Self {
        assert!(a.is_square());
        PolyMap {
            components: (0..a.rows())
                .map(|i| {
                    Poly::from_terms(
                        (0..a.cols()).map(|j| (crate::expr::Monomial::var(j), a.get(i, j).clone())),
                    )
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Poly> {
        self.components
    }

    pub fn evaluate<S: Scalar>(&self, point: &[S]) -> Result<Vec<S>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.len(),
            });
        }
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        self.compose_capped(inner, usize::MAX)
    }

    /// Like [`compose`](Self::compose) but fails once any intermediate
    /// polynomial exceeds `cap` terms.
    pub fn compose_capped(&self, inner: &PolyMap, cap: usize) -> Result<PolyMap> {
        if inner.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        let mut sub = Substitution::new(&inner.components, cap);
        let components = self.components.iter().map(|c| sub.apply(c)).collect::<Result<Vec<_>>>()?;
        Ok(PolyMap { components })
    }

    /// `self` composed with itself `k` times; `k = 0` gives the identity.
    pub fn compose_power(&self, k: u32, cap: usize) -> Result<PolyMap> {
        let mut acc = PolyMap::identity(self.dim());
        for _ in 0..k {
            acc = self.compose_capped(&acc, cap)?;
        }
        Ok(acc)
    }

    pub fn jacobian(&self) -> Matrix<Poly> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.components[i].partial(j))
    }

    pub fn jacobian_at<S: Scalar>(&self, point: &[S]) -> Result<Matrix<S>> {
        self.jacobian().try_map(|p| p.eval(point))
    }

    /// `self - id`.
    pub fn perturbation(&self) -> PolyMap {
        PolyMap {
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| c - &Poly::var(i))
                .collect(),
        }
    }

    /// `id + self`.
    pub fn plus_identity(&self) -> PolyMap {
        PolyMap {
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| c + &Poly::var(i))
                .collect(),
        }
    }

    pub fn add(&self, other: &PolyMap) -> PolyMap {
        assert_eq!(self.dim(), other.dim());
        PolyMap {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &PolyMap) -> PolyMap {
        assert_eq!(self.dim(), other.dim());
        PolyMap {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> PolyMap {
        PolyMap {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// `v -> A v` applied to the output tuple.
    pub fn left_multiply(&self, a: &Matrix<Rational>) -> PolyMap {
        assert_eq!(a.cols(), self.dim());
        PolyMap {
            components: (0..a.rows())
                .map(|i| {
                    let mut acc = Poly::zero();
                    for (j, c) in self.components.iter().enumerate() {
                        if !a.get(i, j).is_zero() {
                            acc = &acc + &c.scale(a.get(i, j));
                        }
                    }
                    acc
                })
                .collect(),
        }
    }

    /// `S^{-1} ∘ self ∘ S` for an invertible linear `S`.
    pub fn conjugate_linear(&self, s: &Matrix<Rational>) -> Result<PolyMap> {
        let s_inv = s.inverse()?;
        let inner = PolyMap::linear(s);
        Ok(self.compose(&inner)?.left_multiply(&s_inv))
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Poly::is_constant)
    }

    pub fn constant_value(&self) -> Option<Vec<Rational>> {
        self.is_constant()
            .then(|| self.components.iter().map(Poly::constant_term).collect())
    }

    /// Maximum total degree over components; `None` for the zero map.
    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(Poly::degree).max()
    }

    pub fn total_terms(&self) -> usize {
        self.components.iter().map(Poly::len).sum()
    }

    pub fn to_expr_map(&self) -> ExprMap {
        ExprMap {
            components: self.components.iter().map(Expr::from_poly).collect(),
            phi: None,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("dim {};\n", self.dim());
        for (i, c) in self.components.iter().enumerate() {
            out.push_str(&format!("f{} = {};\n", i + 1, c.render_with(&var_name)));
        }
        out
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<&PolyMap> for ExprMap {
    fn from(p: &PolyMap) -> Self {
        p.to_expr_map()
    }
}
