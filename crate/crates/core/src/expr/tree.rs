use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{rat, Poly, Rational, Scalar, Transcendental};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    /// k-th derivative of the map's univariate placeholder; `Phi(0)` is phi.
    Phi(u32),
}

impl Func {
    pub fn name(self) -> String {
        match self {
            Func::Sin => "sin".into(),
            Func::Cos => "cos".into(),
            Func::Exp => "exp".into(),
            Func::Phi(k) => format!("phi{}", "'".repeat(k as usize)),
        }
    }

    fn transcendental(self) -> Option<Transcendental> {
        match self {
            Func::Sin => Some(Transcendental::Sin),
            Func::Cos => Some(Transcendental::Cos),
            Func::Exp => Some(Transcendental::Exp),
            Func::Phi(_) => None,
        }
    }
}

/// Closed-form expression tree. Variants are public so parsers can build
/// trees verbatim; arithmetic code goes through the folding constructors
/// (`Expr::sum`, `Expr::product`, ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Var(usize),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(rat(n))
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut constant = Rational::zero();
        let mut rest = Vec::new();
        for t in terms {
            match t {
                Expr::Const(c) => constant += c,
                t => rest.push(t),
            }
        }
        if !constant.is_zero() {
            rest.push(Expr::Const(constant));
        }
        match rest.len() {
            0 => Expr::zero(),
            1 => rest.pop().unwrap(),
            _ => Expr::Sum(rest),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut constant = Rational::one();
        let mut rest = Vec::new();
        for f in factors {
            match f {
                Expr::Const(c) => constant *= c,
                f => rest.push(f),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        if rest.is_empty() {
            return Expr::Const(constant);
        }
        if constant == -Rational::one() {
            let inner = if rest.len() == 1 {
                rest.pop().unwrap()
            } else {
                Expr::Prod(rest)
            };
            return Expr::negate(inner);
        }
        if !constant.is_one() {
            rest.insert(0, Expr::Const(constant));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            Expr::Prod(rest)
        }
    }

    pub fn negate(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn power(base: Expr, exp: u32) -> Expr {
        match (exp, base) {
            (0, _) => Expr::one(),
            (1, b) => b,
            (e, Expr::Const(c)) => Expr::Const(pow_rational(&c, e)),
            (e, b) => Expr::Pow(Box::new(b), e),
        }
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        Expr::Func(func, Box::new(arg))
    }

    pub fn phi(arg: Expr) -> Expr {
        Expr::apply(Func::Phi(0), arg)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::negate(b)])
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::product(vec![a, b])
    }

    /// Largest variable index referenced.
    pub fn max_var(&self) -> Option<usize> {
        let mut best = None;
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                best = Some(best.map_or(*i, |b: usize| b.max(*i)));
            }
        });
        best
    }

    pub fn depends_on(&self, var: usize) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Var(i) if *i == var));
        found
    }

    pub fn contains_phi(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Func(Func::Phi(_), _)));
        found
    }

    pub fn contains_transcendental(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            found |= matches!(e, Expr::Func(f, _) if f.transcendental().is_some())
        });
        found
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Sum(c) | Expr::Prod(c) => c.iter().for_each(|e| e.visit(f)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Func(_, b) => b.visit(f),
        }
    }

    /// Evaluates at `point`; `phi` is the univariate definition (in `x1`,
    /// rendered `t`) that `phi(...)` nodes refer to.
    pub fn eval<S: Scalar>(&self, point: &[S], phi: Option<&Expr>) -> Result<S> {
        Ok(match self {
            Expr::Const(c) => S::from_rational(c),
            Expr::Var(i) => point.get(*i).cloned().ok_or(Error::VariableOutOfRange {
                index: *i,
                dim: point.len(),
            })?,
            Expr::Sum(terms) => {
                let mut acc = S::zero();
                for t in terms {
                    acc = acc + t.eval(point, phi)?;
                }
                acc
            }
            Expr::Prod(factors) => {
                let mut acc = S::one();
                for t in factors {
                    acc = acc * t.eval(point, phi)?;
                }
                acc
            }
            Expr::Pow(b, e) => b.eval(point, phi)?.powu(*e),
            Expr::Neg(b) => -b.eval(point, phi)?,
            Expr::Func(Func::Phi(k), arg) => {
                let def = phi.ok_or(Error::MissingPhi)?;
                let u = arg.eval(point, Some(def))?;
                def.nth_derivative(0, *k).eval(&[u], None)?
            }
            Expr::Func(f, arg) => {
                let u = arg.eval(point, phi)?;
                S::transcendental(f.transcendental().expect("non-phi function"), &u)?
            }
        })
    }

    pub fn differentiate(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(terms) => Expr::sum(terms.iter().map(|t| t.differentiate(var)).collect()),
            Expr::Prod(factors) => {
                let mut terms = Vec::new();
                for (k, f) in factors.iter().enumerate() {
                    let d = f.differentiate(var);
                    if d.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<Expr> = factors.clone();
                    parts[k] = d;
                    terms.push(Expr::product(parts));
                }
                Expr::sum(terms)
            }
            Expr::Pow(b, e) => {
                let db = b.differentiate(var);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![
                    Expr::int(*e as i64),
                    Expr::power((**b).clone(), e - 1),
                    db,
                ])
            }
            Expr::Neg(b) => Expr::negate(b.differentiate(var)),
            Expr::Func(f, arg) => {
                let da = arg.differentiate(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::apply(Func::Cos, (**arg).clone()),
                    Func::Cos => Expr::negate(Expr::apply(Func::Sin, (**arg).clone())),
                    Func::Exp => Expr::apply(Func::Exp, (**arg).clone()),
                    Func::Phi(k) => Expr::apply(Func::Phi(k + 1), (**arg).clone()),
                };
                Expr::product(vec![outer, da])
            }
        }
    }

    pub fn nth_derivative(&self, var: usize, k: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..k {
            e = e.differentiate(var);
        }
        e
    }

    /// Replaces `Var(i)` by `images[i]`; out-of-range variables are kept.
    pub fn substitute(&self, images: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => images.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Expr::Sum(t) => Expr::Sum(t.iter().map(|e| e.substitute(images)).collect()),
            Expr::Prod(t) => Expr::Prod(t.iter().map(|e| e.substitute(images)).collect()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.substitute(images)), *e),
            Expr::Neg(b) => Expr::Neg(Box::new(b.substitute(images))),
            Expr::Func(f, b) => Expr::Func(*f, Box::new(b.substitute(images))),
        }
    }

    /// Replaces every `phi` node by the definition, producing a phi-free tree.
    pub fn inline_phi(&self, def: &Expr) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(t) => Expr::Sum(t.iter().map(|e| e.inline_phi(def)).collect()),
            Expr::Prod(t) => Expr::Prod(t.iter().map(|e| e.inline_phi(def)).collect()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.inline_phi(def)), *e),
            Expr::Neg(b) => Expr::Neg(Box::new(b.inline_phi(def))),
            Expr::Func(Func::Phi(k), b) => def.nth_derivative(0, *k).substitute(&[b.inline_phi(def)]),
            Expr::Func(f, b) => Expr::Func(*f, Box::new(b.inline_phi(def))),
        }
    }

    /// Canonical polynomial; fails on transcendental nodes.
    pub fn to_poly(&self, phi: Option<&Poly>) -> Result<Poly> {
        Ok(match self {
            Expr::Const(c) => Poly::constant(c.clone()),
            Expr::Var(i) => Poly::var(*i),
            Expr::Sum(t) => {
                let mut acc = Poly::zero();
                for e in t {
                    acc = &acc + &e.to_poly(phi)?;
                }
                acc
            }
            Expr::Prod(t) => {
                let mut acc = Poly::one();
                for e in t {
                    acc = &acc * &e.to_poly(phi)?;
                }
                acc
            }
            Expr::Pow(b, e) => b.to_poly(phi)?.pow(*e),
            Expr::Neg(b) => -b.to_poly(phi)?,
            Expr::Func(Func::Phi(k), arg) => {
                let def = phi.ok_or(Error::MissingPhi)?;
                let mut d = def.clone();
                for _ in 0..*k {
                    d = d.partial(0);
                }
                d.substitute(&[arg.to_poly(phi)?])
            }
            Expr::Func(..) => return Err(Error::NotPolynomial(self.to_string())),
        })
    }

    pub fn from_poly(p: &Poly) -> Expr {
        let mut terms = Vec::new();
        for (m, c) in p.terms().rev() {
            let mut factors = vec![Expr::Const(c.clone())];
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    factors.push(Expr::power(Expr::Var(i), e));
                }
            }
            terms.push(Expr::product(factors));
        }
        Expr::sum(terms)
    }

    pub fn render_with(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        self.write(&mut out, Ctx::Top, name);
        out
    }

    fn write(&self, out: &mut String, ctx: Ctx, name: &dyn Fn(usize) -> String) {
        let paren = match (self, ctx) {
            (Expr::Sum(_), Ctx::Top) => false,
            (Expr::Sum(_), _) => true,
            (Expr::Prod(_), Ctx::Factor | Ctx::Operand | Ctx::Base) => true,
            (Expr::Neg(_), Ctx::Base) => true,
            (Expr::Pow(..), Ctx::Base) => true,
            (Expr::Const(c), Ctx::Base) => c.is_negative() || !c.is_integer(),
            (Expr::Const(_), Ctx::Operand) => true,
            _ => false,
        };
        if paren {
            out.push('(');
            self.write(out, Ctx::Top, name);
            out.push(')');
            return;
        }
        match self {
            Expr::Const(c) => out.push_str(&c.to_string()),
            Expr::Var(i) => out.push_str(&name(*i)),
            Expr::Sum(terms) => {
                for (k, t) in terms.iter().enumerate() {
                    if k == 0 {
                        t.write(out, Ctx::Term, name);
                    } else if let Expr::Neg(inner) = t {
                        out.push_str(" - ");
                        inner.write(out, Ctx::Term, name);
                    } else {
                        out.push_str(" + ");
                        t.write(out, Ctx::Term, name);
                    }
                }
            }
            Expr::Prod(factors) => {
                for (k, f) in factors.iter().enumerate() {
                    if k > 0 {
                        out.push('*');
                    }
                    f.write(out, Ctx::Factor, name);
                }
            }
            Expr::Pow(b, e) => {
                b.write(out, Ctx::Base, name);
                out.push('^');
                out.push_str(&e.to_string());
            }
            Expr::Neg(b) => {
                out.push('-');
                b.write(out, Ctx::Operand, name);
            }
            Expr::Func(f, arg) => {
                out.push_str(&f.name());
                out.push('(');
                arg.write(out, Ctx::Top, name);
                out.push(')');
            }
        }
    }
}

/// Syntactic position of a subexpression while rendering.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    Term,
    Factor,
    /// Operand of unary minus.
    Operand,
    Base,
}

fn pow_rational(c: &Rational, e: u32) -> Rational {
    num_traits::pow(c.clone(), e as usize)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(&|i| format!("x{}", i + 1)))
    }
}
