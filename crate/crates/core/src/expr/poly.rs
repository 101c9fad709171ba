use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use rustc_hash::FxHashMap;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Rational, Scalar};
use crate::error::{Error, Result};

/// Exponent vector with trailing zeros trimmed, so the same monomial has one
/// representation regardless of the ambient number of variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(index: usize) -> Self {
        Self::var_pow(index, 1)
    }

    pub fn var_pow(index: usize, exp: u32) -> Self {
        let mut e = vec![0; index + 1];
        e[index] = exp;
        Self::from_exponents(e)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.0.get(var).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (long, short) = if self.0.len() >= other.0.len() {
            (&self.0, &other.0)
        } else {
            (&other.0, &self.0)
        };
        let mut e = long.clone();
        for (a, b) in e.iter_mut().zip(short) {
            *a += b;
        }
        Monomial(e)
    }

    /// `None` when `var` does not occur.
    fn differentiate(&self, var: usize) -> Option<(u32, Monomial)> {
        let e = self.exponent(var);
        if e == 0 {
            return None;
        }
        let mut exps = self.0.clone();
        exps[var] -= 1;
        Some((e, Monomial::from_exponents(exps)))
    }
}

/// Graded lexicographic: total degree first, then the first differing
/// exponent (x1 before x2 ...).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for i in 0..n {
                match self.exponent(i).cmp(&other.exponent(i)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over the rationals in canonical form:
/// no stored zero coefficients, terms ordered by graded lex. Two polynomials
/// are equal as functions iff they are structurally equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn var(index: usize) -> Self {
        Self::monomial(Monomial::var(index), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(Rational::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        Poly { terms: acc }
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(var)).max().unwrap_or(0)
    }

    /// The homogeneous slice of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut vars = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    vars.insert(i);
                }
            }
        }
        vars
    }

    /// Number of variable slots needed (highest index + 1).
    pub fn arity(&self) -> usize {
        self.terms.keys().map(|m| m.exponents().len()).max().unwrap_or(0)
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(var) > 0)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Product that refuses to materialize more than `cap` terms, or to
    /// perform more than `16 * cap` coefficient multiplications.
    pub fn mul_capped(&self, other: &Poly, cap: usize) -> Result<Poly> {
        let work = self.len().saturating_mul(other.len());
        if work > cap.saturating_mul(16) {
            return Err(Error::ResourceCap {
                what: "polynomial product work",
                count: work,
                cap: cap.saturating_mul(16),
            });
        }
        let p = self * other;
        if p.len() > cap {
            return Err(Error::ResourceCap {
                what: "polynomial terms",
                count: p.len(),
                cap,
            });
        }
        Ok(p)
    }

    pub fn partial(&self, var: usize) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            m.differentiate(var)
                .map(|(e, dm)| (dm, c * Rational::from_integer(e.into())))
        }))
    }

    pub fn eval<S: Scalar>(&self, point: &[S]) -> Result<S> {
        let arity = self.arity();
        if arity > point.len() {
            return Err(Error::VariableOutOfRange {
                index: arity - 1,
                dim: point.len(),
            });
        }
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut t = S::from_rational(c);
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    t = t * x.powu(e);
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Replaces `x_i` by `images[i]`; variables beyond `images` are kept.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        self.substitute_capped(images, usize::MAX / 32)
            .expect("uncapped substitution")
    }

    pub fn substitute_capped(&self, images: &[Poly], cap: usize) -> Result<Poly> {
        Substitution::new(images, cap).apply(self)
    }

    /// Renames every variable through `f`.
    pub fn map_vars(&self, f: impl Fn(usize) -> usize) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let mut exps = Vec::new();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let j = f(i);
                if exps.len() <= j {
                    exps.resize(j + 1, 0);
                }
                exps[j] += e;
            }
            (Monomial::from_exponents(exps), c.clone())
        }))
    }

    pub fn shift_vars(&self, offset: usize) -> Poly {
        self.map_vars(|i| i + offset)
    }

    pub fn render_with(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !mag.is_one() || m.is_one() {
                factors.push(mag.to_string());
            }
            for (i, &e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(name(i)),
                    _ => factors.push(format!("{}^{}", name(i), e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Substitution `x_i -> images[i]` that remembers monomial images, so one
/// instance can be applied to every component of a map.
pub struct Substitution {
    images: Vec<ScaledPoly>,
    cap: usize,
    memo: HashMap<Monomial, ScaledPoly>,
}

impl Substitution {
    /// Fails with a resource-cap error once any intermediate polynomial
    /// exceeds `cap` terms.
    pub fn new(images: &[Poly], cap: usize) -> Self {
        let mut memo = HashMap::new();
        memo.insert(Monomial::one(), ScaledPoly::from_poly(&Poly::one()));
        Substitution { images: images.iter().map(ScaledPoly::from_poly).collect(), cap, memo }
    }

    pub fn apply(&mut self, p: &Poly) -> Result<Poly> {
        for m in p.terms.keys() {
            self.fill(m)?;
        }
        let parts: Vec<(&Rational, &ScaledPoly)> = p.terms.iter().map(|(m, c)| (c, &self.memo[m])).collect();
        let out = ScaledPoly::linear_combination(&parts);
        if out.len() > self.cap {
            return Err(Error::ResourceCap {
                what: "polynomial terms",
                count: out.len(),
                cap: self.cap,
            });
        }
        Ok(out)
    }

    // The image of a monomial is built from the image of a divisor with one
    // fewer factor, so every step multiplies by a single `images[i]`.
    fn fill(&mut self, m: &Monomial) -> Result<()> {
        if self.memo.contains_key(m) {
            return Ok(());
        }
        let exps = m.exponents();
        let i = exps.len() - 1;
        let mut pred = exps.to_vec();
        pred[i] -= 1;
        let pred = Monomial::from_exponents(pred);
        self.fill(&pred)?;
        let base = &self.memo[&pred];
        let var;
        let factor = match self.images.get(i) {
            Some(img) => img,
            None => {
                var = ScaledPoly::from_poly(&Poly::var(i));
                &var
            }
        };
        let work = base.terms.len().saturating_mul(factor.terms.len());
        if work > self.cap.saturating_mul(16) {
            return Err(Error::ResourceCap {
                what: "polynomial product work",
                count: work,
                cap: self.cap.saturating_mul(16),
            });
        }
        let p = base.mul(factor);
        if p.terms.len() > self.cap {
            return Err(Error::ResourceCap {
                what: "polynomial terms",
                count: p.terms.len(),
                cap: self.cap,
            });
        }
        self.memo.insert(m.clone(), p);
        Ok(())
    }
}

/// Integer numerators over one shared denominator. Long chains of products
/// stay in this form so rationals are reduced once, at the end.
#[derive(Clone, Debug)]
struct ScaledPoly {
    terms: Vec<(Monomial, BigInt)>,
    den: BigInt,
}

impl ScaledPoly {
    fn from_poly(p: &Poly) -> Self {
        let den = p.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms = p.terms.iter().map(|(m, c)| (m.clone(), c.numer() * (&den / c.denom()))).collect();
        ScaledPoly { terms, den }
    }

    fn to_poly(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), Rational::new(c.clone(), self.den.clone()))).collect(),
        }
    }

    /// Divides out the common factor of the denominator and all numerators.
    fn normalize(mut self) -> Self {
        if self.den.is_one() {
            return self;
        }
        let mut g = self.den.clone();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                return self;
            }
        }
        for (_, c) in &mut self.terms {
            *c /= &g;
        }
        self.den /= g;
        self
    }

    fn mul(&self, other: &ScaledPoly) -> ScaledPoly {
        let terms = small_product(&self.terms, &other.terms).unwrap_or_else(|| {
            let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
            for (m1, c1) in &self.terms {
                for (m2, c2) in &other.terms {
                    *acc.entry(m1.mul(m2)).or_insert_with(BigInt::zero) += c1 * c2;
                }
            }
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
        });
        ScaledPoly { terms, den: &self.den * &other.den }.normalize()
    }

    /// `sum c_k p_k` as a reduced polynomial.
    fn linear_combination(parts: &[(&Rational, &ScaledPoly)]) -> Poly {
        let dens: Vec<BigInt> = parts.iter().map(|(c, p)| &p.den * c.denom()).collect();
        let l = dens.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
        let factors: Vec<BigInt> = parts.iter().zip(&dens).map(|((c, _), d)| c.numer() * (&l / d)).collect();
        let small = || -> Option<HashMap<&Monomial, i128>> {
            let mut acc: HashMap<&Monomial, i128> = HashMap::new();
            for ((_, p), f) in parts.iter().zip(&factors) {
                let f = f.to_i128()?;
                for (m, c) in &p.terms {
                    let v = f.checked_mul(c.to_i128()?)?;
                    let slot = acc.entry(m).or_insert(0);
                    *slot = slot.checked_add(v)?;
                }
            }
            Some(acc)
        };
        let acc: HashMap<&Monomial, BigInt> = match small() {
            Some(acc) => acc.into_iter().map(|(m, c)| (m, BigInt::from(c))).collect(),
            None => {
                let mut acc: HashMap<&Monomial, BigInt> = HashMap::new();
                for ((_, p), f) in parts.iter().zip(&factors) {
                    for (m, c) in &p.terms {
                        *acc.entry(m).or_insert_with(BigInt::zero) += f * c;
                    }
                }
                acc
            }
        };
        Poly {
            terms: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m.clone(), Rational::new(c, l.clone())))
                .collect(),
        }
    }
}

/// Exponent vectors of up to 8 variables packed 16 bits each; a product is
/// the sum of the packed keys as long as no exponent reaches `2^16`.
fn pack(m: &Monomial) -> u128 {
    m.exponents().iter().enumerate().fold(0, |k, (i, &e)| k | (e as u128) << (16 * i))
}

fn unpack(k: u128) -> Monomial {
    Monomial::from_exponents((0..8).map(|i| ((k >> (16 * i)) & 0xffff) as u32).collect())
}

/// The product with packed monomials and `i128` coefficients, or `None`
/// when the operands are too wide or a coefficient overflows.
fn small_product(a: &[(Monomial, BigInt)], b: &[(Monomial, BigInt)]) -> Option<Vec<(Monomial, BigInt)>> {
    let fits = |t: &[(Monomial, BigInt)]| t.iter().all(|(m, _)| m.exponents().len() <= 8);
    let degree = |t: &[(Monomial, BigInt)]| t.iter().map(|(m, _)| m.degree()).max().unwrap_or(0);
    if !fits(a) || !fits(b) || degree(a) + degree(b) >= 1 << 16 {
        return None;
    }
    let small = |t: &[(Monomial, BigInt)]| -> Option<Vec<(u128, i128)>> {
        t.iter().map(|(m, c)| c.to_i128().map(|c| (pack(m), c))).collect()
    };
    let (a, b) = (small(a)?, small(b)?);
    let mut acc: FxHashMap<u128, i128> = FxHashMap::default();
    acc.reserve(a.len().saturating_mul(b.len()).min(1 << 20));
    for &(k1, c1) in &a {
        for &(k2, c2) in &b {
            let prod = c1.checked_mul(c2)?;
            let slot = acc.entry(k1 + k2).or_insert(0);
            *slot = slot.checked_add(prod)?;
        }
    }
    Some(acc.into_iter().filter(|&(_, c)| c != 0).map(|(k, c)| (unpack(k), BigInt::from(c))).collect())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(&|i| format!("x{}", i + 1)))
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            match terms.get_mut(m) {
                Some(k) => {
                    *k += c;
                    if k.is_zero() {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        Poly { terms }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        ScaledPoly::from_poly(self).mul(&ScaledPoly::from_poly(rhs)).to_poly()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
