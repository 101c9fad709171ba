//! Dense univariate polynomials over the rationals and Sturm sequences.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{Poly, Rational};

/// Coefficients in increasing degree, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// Reads a polynomial in the single variable `var`.
    pub fn from_poly(p: &Poly, var: usize) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (m, c) in p.terms() {
            if m.exponents().iter().enumerate().any(|(i, &e)| i != var && e > 0) {
                return Err(Error::Precondition(format!("{p} is not univariate in x{}", var + 1)));
            }
            let k = m.exponent(var) as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, Rational::zero());
            }
            coeffs[k] = c.clone();
        }
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer((k as i64).into()))
                .collect(),
        )
    }

    fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let q = rem.last().expect("nonempty") / &lead;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &q * c;
            }
            quot[k] = q;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree(&self) -> UniPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn root_bound(&self) -> Rational {
        let lead = self.leading().abs();
        let mut m = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len().saturating_sub(1)] {
            let q = c.abs() / &lead;
            if q > m {
                m = q;
            }
        }
        m + Rational::one()
    }

    fn sign_at(&self, at: &Endpoint) -> Ordering {
        match at {
            Endpoint::Finite(x) => self.eval(x).cmp(&Rational::zero()),
            Endpoint::PosInf => self.leading().cmp(&Rational::zero()),
            Endpoint::NegInf => {
                let s = self.leading().cmp(&Rational::zero());
                if self.degree().unwrap_or(0) % 2 == 1 {
                    s.reverse()
                } else {
                    s
                }
            }
        }
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Poly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            p = p + Poly::monomial(crate::expr::Monomial::var_pow(0, k as u32), c.clone());
        }
        f.write_str(&p.render_with(&|_| "t".to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

/// `p, p', -rem(p, p'), ...` for the square-free part of `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SturmChain {
    chain: Vec<UniPoly>,
}

impl SturmChain {
    pub fn new(p: &UniPoly) -> Self {
        let p = p.squarefree();
        let mut chain = vec![p.clone()];
        if p.is_zero() {
            return SturmChain { chain };
        }
        let mut prev = p.clone();
        let mut cur = p.derivative();
        while !cur.is_zero() {
            chain.push(cur.clone());
            let r = prev.div_rem(&cur).1;
            prev = cur;
            cur = r.scale(&-Rational::one());
        }
        SturmChain { chain }
    }

    pub fn polys(&self) -> &[UniPoly] {
        &self.chain
    }

    pub fn variations(&self, at: &Endpoint) -> usize {
        let signs: Vec<Ordering> = self
            .chain
            .iter()
            .map(|q| q.sign_at(at))
            .filter(|s| *s != Ordering::Equal)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: &Endpoint, hi: &Endpoint) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

/// Number of distinct real roots of `p != 0` in `(lo, hi]`.
pub fn sturm_count(p: &UniPoly, lo: &Endpoint, hi: &Endpoint) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::Precondition("root count of the zero polynomial".into()));
    }
    Ok(SturmChain::new(p).count(lo, hi))
}

/// A real root either found exactly or isolated in `(lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub enum RealRoot {
    Exact(Rational),
    Isolated { lo: Rational, hi: Rational },
}

impl RealRoot {
    pub fn approx(&self) -> f64 {
        use num_traits::ToPrimitive;
        match self {
            RealRoot::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            RealRoot::Isolated { lo, hi } => ((lo + hi) / Rational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// The rational with the smallest denominator in `[lo, hi]` (then the
/// smallest magnitude), by continued fractions.
pub fn simplest_rational(lo: &Rational, hi: &Rational) -> Rational {
    debug_assert!(lo <= hi);
    if lo <= &Rational::zero() && hi >= &Rational::zero() {
        return Rational::zero();
    }
    if hi < &Rational::zero() {
        return -simplest_rational(&-hi, &-lo);
    }
    let c = lo.ceil();
    if &c <= hi {
        return c;
    }
    let n = lo.floor();
    let inner = simplest_rational(&(hi - &n).recip(), &(lo - &n).recip());
    n + inner.recip()
}

/// Every distinct real root of `p != 0`, in increasing order, each
/// isolated to an interval no wider than `width` (or found exactly).
pub fn real_roots(p: &UniPoly, width: &Rational) -> Result<Vec<RealRoot>> {
    if p.is_zero() {
        return Err(Error::Precondition("roots of the zero polynomial".into()));
    }
    let sq = p.squarefree();
    let chain = SturmChain::new(&sq);
    let b = sq.root_bound();
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    let two = Rational::from_integer(2.into());
    while let Some((lo, hi)) = stack.pop() {
        let k = chain.count(&Endpoint::Finite(lo.clone()), &Endpoint::Finite(hi.clone()));
        if k == 0 {
            continue;
        }
        if sq.eval(&hi).is_zero() && k == 1 {
            out.push(RealRoot::Exact(hi));
            continue;
        }
        if k == 1 && &hi - &lo <= *width {
            // Rational roots with small denominators are recovered exactly.
            let q = simplest_rational(&lo, &hi);
            if q > lo && sq.eval(&q).is_zero() {
                out.push(RealRoot::Exact(q));
            } else {
                out.push(RealRoot::Isolated { lo, hi });
            }
            continue;
        }
        let mid = (&lo + &hi) / &two;
        // Push the upper half first so roots come out in increasing order.
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    Ok(out)
}
