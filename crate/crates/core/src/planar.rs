//! Planar maps with unipotent Jacobian:
//! `f(x, y) = (x + b phi(ax + by) + c, y - a phi(ax + by) + d)`.
//!
//! Construction works for any univariate `phi`; extraction of the data from
//! a map is exact and limited to polynomial maps.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprMap, Monomial, Poly, PolyMap, Rational};
use crate::jacobian::is_unipotent;
use crate::numeric::{nonzero_witness, random_rational, SeededRng};

#[derive(Clone, Debug)]
pub struct PlanarNormalForm {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    /// Univariate in `t`.
    pub phi: Expr,
}

impl PlanarNormalForm {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational, phi: Expr) -> Self {
        PlanarNormalForm { a, b, c, d, phi }
    }

    pub fn phi_poly(&self) -> Result<Poly> {
        self.phi.to_poly(None)
    }

    /// Representative with `(a, b)` coprime integers, first nonzero entry
    /// positive, and `phi(0) = 0`. The map is unchanged.
    pub fn normalized(&self) -> Result<PlanarNormalForm> {
        let phi = self.phi_poly()?;
        let phi0 = phi.constant_term();
        let c = &self.c + &self.b * &phi0;
        let d = &self.d - &self.a * &phi0;
        let phi = phi - Poly::constant(phi0);
        if phi.is_zero() || (self.a.is_zero() && self.b.is_zero()) {
            return Ok(PlanarNormalForm::new(Rational::zero(), Rational::zero(), c, d, Expr::zero()));
        }
        let (a, b, k) = primitive_direction(&self.a, &self.b);
        // b phi(s) = (k b') phi(k s') = b' (k phi(k t))(s').
        let scaled = phi.substitute(&[Poly::var(0).scale(&k)]).scale(&k);
        Ok(PlanarNormalForm::new(a, b, c, d, Expr::from_poly(&scaled)))
    }

    fn same_as(&self, other: &PlanarNormalForm) -> Result<bool> {
        Ok(self.a == other.a
            && self.b == other.b
            && self.c == other.c
            && self.d == other.d
            && self.phi_poly()? == other.phi_poly()?)
    }

    /// Equal after normalization of both sides.
    pub fn equivalent(&self, other: &PlanarNormalForm) -> Result<bool> {
        self.normalized()?.same_as(&other.normalized()?)
    }
}

impl fmt::Display for PlanarNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi = self.phi.render_with(&|_| "t".to_string());
        write!(f, "a = {}, b = {}, c = {}, d = {}, phi(t) = {}", self.a, self.b, self.c, self.d, phi)
    }
}

/// `(a, b) = k (a', b')` with `a', b'` coprime integers and the first
/// nonzero of them positive. Returns `(a', b', k)`.
fn primitive_direction(a: &Rational, b: &Rational) -> (Rational, Rational, Rational) {
    let l = a.denom().lcm(b.denom());
    let ai = (a * Rational::from_integer(l.clone())).to_integer();
    let bi = (b * Rational::from_integer(l.clone())).to_integer();
    let mut g = ai.gcd(&bi);
    let first_negative = if ai.is_zero() { bi.is_negative() } else { ai.is_negative() };
    if first_negative {
        g = -g;
    }
    let ap = Rational::from_integer(&ai / &g);
    let bp = Rational::from_integer(&bi / &g);
    let k = Rational::new(g, l);
    (ap, bp, k)
}

fn value_at_origin(h: &PolyMap) -> Vec<Rational> {
    h.components().iter().map(Poly::constant_term).collect()
}

fn linear(a: &Rational, b: &Rational) -> Expr {
    Expr::sum(vec![
        Expr::mul(Expr::Const(a.clone()), Expr::Var(0)),
        Expr::mul(Expr::Const(b.clone()), Expr::Var(1)),
    ])
}

/// `(x + b phi(ax + by) + c, y - a phi(ax + by) + d)` with `phi` attached.
pub fn make_planar(nf: &PlanarNormalForm) -> Result<ExprMap> {
    let s = Expr::phi(linear(&nf.a, &nf.b));
    let f1 = Expr::sum(vec![Expr::Var(0), Expr::mul(Expr::Const(nf.b.clone()), s.clone()), Expr::Const(nf.c.clone())]);
    let f2 = Expr::sum(vec![
        Expr::Var(1),
        Expr::negate(Expr::mul(Expr::Const(nf.a.clone()), s)),
        Expr::Const(nf.d.clone()),
    ]);
    ExprMap::new(vec![f1, f2], Some(nf.phi.clone()))
}

/// `(u - c - b phi(s), v - d + a phi(s))` with `s = a(u - c) + b(v - d)`.
pub fn planar_inverse_map(nf: &PlanarNormalForm) -> Result<ExprMap> {
    let u = Expr::sub(Expr::Var(0), Expr::Const(nf.c.clone()));
    let v = Expr::sub(Expr::Var(1), Expr::Const(nf.d.clone()));
    let s = Expr::phi(Expr::add(
        Expr::mul(Expr::Const(nf.a.clone()), u.clone()),
        Expr::mul(Expr::Const(nf.b.clone()), v.clone()),
    ));
    let g1 = Expr::sub(u, Expr::mul(Expr::Const(nf.b.clone()), s.clone()));
    let g2 = Expr::add(v, Expr::mul(Expr::Const(nf.a.clone()), s));
    ExprMap::new(vec![g1, g2], Some(nf.phi.clone()))
}

/// Reads `(a, b, c, d, phi)` off a polynomial planar map with unipotent
/// Jacobian, and checks that the data rebuilds `f` exactly.
pub fn extract_normal_form(f: &PolyMap) -> Result<PlanarNormalForm> {
    if f.dim() != 2 {
        return Err(Error::Precondition(format!("planar extraction needs n = 2, got n = {}", f.dim())));
    }
    let verdict = is_unipotent(f);
    if !verdict.is_proven() {
        return Err(Error::Precondition(format!("Jacobian is not unipotent: {verdict}")));
    }
    let h = f.perturbation();
    let h0 = value_at_origin(&h);
    let (c, d) = (h0[0].clone(), h0[1].clone());
    let live = h.sub(&PolyMap::constant(&h0));
    if live.is_constant() {
        return Ok(PlanarNormalForm::new(Rational::zero(), Rational::zero(), c, d, Expr::zero()));
    }

    let jac = live.jacobian();
    let (row, col) = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .find(|&(i, j)| !jac.get(i, j).is_zero())
        .expect("nonconstant map has a nonzero partial");
    let point = nonzero_witness(jac.get(row, col), 2).expect("nonzero polynomial has a nonzero value");
    let at = jac.try_map(|p| p.eval(&point))?;
    // J(h) = phi'(s) [[ab, b^2], [-a^2, -ab]]: every nonzero column is a
    // multiple of (b, -a).
    let column = at.column(col);
    let (a, b, _) = primitive_direction(&-&column[1], &column[0]);

    let norm2 = &a * &a + &b * &b;
    let line = [Poly::var(0).scale(&(&a / &norm2)), Poly::var(0).scale(&(&b / &norm2))];
    let phi = if !b.is_zero() {
        live.components()[0].substitute(&line).scale(&b.recip())
    } else {
        live.components()[1].substitute(&line).scale(&-a.recip())
    };
    let nf = PlanarNormalForm::new(a, b, c, d, Expr::from_poly(&phi));
    let rebuilt = make_planar(&nf)?.to_poly()?;
    if &rebuilt != f {
        return Err(Error::NotPlanarNormalizable(format!(
            "reconstruction from ({nf}) differs from the input map"
        )));
    }
    Ok(nf)
}

/// `a h_1 + b h_2 = 0` identically for `h = f - id - h(0)`.
pub fn planar_invariant_check(f: &PolyMap, nf: &PlanarNormalForm) -> bool {
    let h = f.perturbation();
    let h0 = value_at_origin(&h);
    let live = h.sub(&PolyMap::constant(&h0));
    let combo = live.components()[0].scale(&nf.a) + live.components()[1].scale(&nf.b);
    combo.is_zero()
}

/// Random polynomial normal form with integer `a, b` in `[-coeff, coeff]`
/// (not both zero), small rational offsets and `1 <= deg phi <= max_degree`,
/// `phi(0) = 0`.
pub fn random_normal_form(rng: &mut SeededRng, coeff: i64, max_degree: u32) -> PlanarNormalForm {
    let (a, b) = loop {
        let a: i64 = rng.gen_range(-coeff..=coeff);
        let b: i64 = rng.gen_range(-coeff..=coeff);
        if a != 0 || b != 0 {
            break (a, b);
        }
    };
    let degree = rng.gen_range(1..=max_degree);
    let mut phi = Poly::zero();
    for k in 1..=degree {
        let mut coef = random_rational(rng, 4, 3);
        if k == degree && coef.is_zero() {
            coef = Rational::one();
        }
        phi = phi + Poly::monomial(Monomial::var_pow(0, k), coef);
    }
    PlanarNormalForm::new(
        Rational::from_integer(a.into()),
        Rational::from_integer(b.into()),
        random_rational(rng, 5, 4),
        random_rational(rng, 5, 4),
        Expr::from_poly(&phi),
    )
}
