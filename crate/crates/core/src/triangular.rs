//! Strong nilpotence and simultaneous strict upper triangularization.
//!
//! The pointwise family `{J(h)(x)}` of a polynomial map is replaced by the
//! finitely many coefficient matrices `C_m` with `J(h)(x) = sum_m x^m C_m`.
//! Every evaluation lies in their span, and a span is strictly upper
//! triangular in some basis iff its generators are.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::expr::{ExprMap, Monomial, Poly, PolyMap, Rational};
use crate::matrix::Matrix;
use crate::numeric::{nonzero_witness, random_rational, seeded_rng, uniform_point, SeededRng};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily {
    dim: usize,
    generators: Vec<Matrix<Rational>>,
}

impl MatrixFamily {
    pub fn new(dim: usize, generators: Vec<Matrix<Rational>>) -> Result<Self> {
        for g in &generators {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if g.rows() != dim { g.rows() } else { g.cols() },
                });
            }
        }
        Ok(MatrixFamily { dim, generators })
    }

    pub fn zero(dim: usize) -> Self {
        MatrixFamily { dim, generators: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix<Rational>] {
        &self.generators
    }

    pub fn is_zero_family(&self) -> bool {
        self.generators.iter().all(Matrix::is_zero)
    }

    pub fn conjugated(&self, p: &Matrix<Rational>) -> Result<MatrixFamily> {
        let p_inv = p.inverse()?;
        Ok(MatrixFamily {
            dim: self.dim,
            generators: self.generators.iter().map(|g| p_inv.mul(g).mul(p)).collect(),
        })
    }
}

/// Distinct nonzero monomial-coefficient matrices of `J(h)`, in grlex order
/// of their monomials.
pub fn coefficient_family(h: &PolyMap) -> MatrixFamily {
    let n = h.dim();
    let jac = h.jacobian();
    let mut by_monomial: BTreeMap<Monomial, Matrix<Rational>> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            for (m, c) in jac.get(i, j).terms() {
                by_monomial
                    .entry(m.clone())
                    .or_insert_with(|| Matrix::zeros(n, n))
                    .set(i, j, c.clone());
            }
        }
    }
    let mut seen = HashSet::new();
    let generators = by_monomial
        .into_values()
        .filter(|g| seen.insert(g.clone()))
        .collect();
    MatrixFamily { dim: n, generators }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrongNilpotence {
    /// The generic product `J(h)(a_1)...J(h)(a_n)` is identically zero.
    Strong,
    /// Entry `entry` of the product is `value != 0` at `points`.
    NotStrong {
        points: Vec<Vec<Rational>>,
        entry: (usize, usize),
        value: Rational,
    },
}

impl StrongNilpotence {
    pub fn is_strong(&self) -> bool {
        matches!(self, StrongNilpotence::Strong)
    }
}

impl fmt::Display for StrongNilpotence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrongNilpotence::Strong => write!(f, "strongly nilpotent"),
            StrongNilpotence::NotStrong { points, entry, value } => {
                write!(f, "not strongly nilpotent: entry ({}, {}) of the product is {value} at", entry.0 + 1, entry.1 + 1)?;
                for p in points {
                    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                    write!(f, " ({})", parts.join(", "))?;
                }
                Ok(())
            }
        }
    }
}

fn poly_matrix_mul_capped(a: &Matrix<Poly>, b: &Matrix<Poly>, cap: usize) -> Result<Matrix<Poly>> {
    let mut out = Matrix::from_fn(a.rows(), b.cols(), |_, _| Poly::zero());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = Poly::zero();
            for k in 0..a.cols() {
                let (x, y) = (a.get(i, k), b.get(k, j));
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                acc = &acc + &x.mul_capped(y, cap)?;
                if acc.len() > cap {
                    return Err(Error::ResourceCap { what: "monomials", count: acc.len(), cap });
                }
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Forms `J(h)(a_1) ... J(h)(a_n)` in `n^2` fresh variables and decides
/// whether it vanishes identically.
pub fn strongly_nilpotent_generic(h: &PolyMap, cap: usize) -> Result<StrongNilpotence> {
    let n = h.dim();
    let jac = h.jacobian();
    let block = |k: usize| jac.map(|p| p.shift_vars(k * n));
    let mut prod = block(0);
    for k in 1..n {
        prod = poly_matrix_mul_capped(&prod, &block(k), cap)?;
    }
    for i in 0..n {
        for j in 0..n {
            let entry = prod.get(i, j);
            if let Some(w) = nonzero_witness(entry, n * n) {
                let value = entry.eval(&w)?;
                let points = w.chunks(n).map(<[Rational]>::to_vec).collect();
                return Ok(StrongNilpotence::NotStrong { points, entry: (i, j), value });
            }
        }
    }
    Ok(StrongNilpotence::Strong)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampledStrongNilpotence {
    ProbablyStrong { tuples: usize, tol: f64 },
    NotStrong { points: Vec<Vec<f64>>, max_entry: f64 },
    Inconclusive { reason: String },
}

impl SampledStrongNilpotence {
    pub fn is_probably_strong(&self) -> bool {
        matches!(self, SampledStrongNilpotence::ProbablyStrong { .. })
    }
}

impl fmt::Display for SampledStrongNilpotence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampledStrongNilpotence::ProbablyStrong { tuples, tol } => {
                write!(f, "probably strongly nilpotent ({tuples} tuples, tol {tol:e})")
            }
            SampledStrongNilpotence::NotStrong { points, max_entry } => {
                write!(f, "not strongly nilpotent: product entry {max_entry:e} at {points:?}")
            }
            SampledStrongNilpotence::Inconclusive { reason } => write!(f, "inconclusive: {reason}"),
        }
    }
}

/// Multiplies float Jacobians at seeded random `n`-tuples of points.
pub fn strongly_nilpotent_sampled(m: &ExprMap, cfg: &RunConfig) -> SampledStrongNilpotence {
    let n = m.dim();
    let jac = m.jacobian();
    let mut rng = seeded_rng(cfg.seed);
    let (lo, hi) = cfg.sample_box;
    for _ in 0..cfg.strong_tuples {
        let points: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, n, lo, hi)).collect();
        let mut prod = Matrix::<f64>::identity(n);
        for p in &points {
            match jac.try_map(|e| e.eval(p, m.phi())) {
                Ok(j) => prod = prod.mul(&j),
                Err(e) => return SampledStrongNilpotence::Inconclusive { reason: e.to_string() },
            }
        }
        let max_entry = prod.entries().fold(0.0f64, |a, x| a.max(x.abs()));
        if !max_entry.is_finite() {
            return SampledStrongNilpotence::Inconclusive {
                reason: format!("non-finite product at {points:?}"),
            };
        }
        if max_entry > cfg.strong_tol {
            return SampledStrongNilpotence::NotStrong { points, max_entry };
        }
    }
    SampledStrongNilpotence::ProbablyStrong { tuples: cfg.strong_tuples, tol: cfg.strong_tol }
}

/// Invertible `S` whose columns form a flag `V_1 ⊂ ... ⊂ V_n` with every
/// generator mapping `V_k` into `V_{k-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularizingBasis {
    s: Matrix<Rational>,
    s_inv: Matrix<Rational>,
}

impl TriangularizingBasis {
    pub fn matrix(&self) -> &Matrix<Rational> {
        &self.s
    }

    pub fn inverse(&self) -> &Matrix<Rational> {
        &self.s_inv
    }

    /// Basis of `V_k`: the first `k` columns of `S`.
    pub fn flag(&self, k: usize) -> Vec<Vec<Rational>> {
        (0..k).map(|j| self.s.column(j)).collect()
    }

    pub fn conjugate(&self, g: &Matrix<Rational>) -> Matrix<Rational> {
        self.s_inv.mul(g).mul(&self.s)
    }

    /// Exact check that `S^{-1} G S` is strictly upper triangular for every
    /// generator.
    pub fn verify(&self, family: &MatrixFamily) -> bool {
        !self.s.det_gauss().is_zero()
            && family
                .generators()
                .iter()
                .all(|g| self.conjugate(g).is_strictly_upper())
    }
}

fn stack(gens: &[Matrix<Rational>], dim: usize) -> Matrix<Rational> {
    let rows: Vec<Vec<Rational>> = gens.iter().flat_map(Matrix::to_rows).collect();
    if rows.is_empty() {
        Matrix::zeros(0, dim)
    } else {
        Matrix::from_rows(rows)
    }
}

fn flag_basis(gens: &[Matrix<Rational>], dim: usize, stage: usize) -> Result<Matrix<Rational>> {
    if dim == 0 || gens.iter().all(Matrix::is_zero) {
        return Ok(Matrix::identity(dim));
    }
    let kernel = stack(gens, dim).kernel();
    let w = kernel
        .into_iter()
        .next()
        .ok_or(Error::NotStronglyNilpotent { stage })?;
    let pivot = w.iter().position(|x| !x.is_zero()).expect("kernel vectors are nonzero");
    let mut cols = vec![w];
    for j in (0..dim).filter(|&j| j != pivot) {
        let mut e = vec![Rational::zero(); dim];
        e[j] = Rational::one();
        cols.push(e);
    }
    let p = Matrix::from_fn(dim, dim, |i, j| cols[j][i].clone());
    let p_inv = p.inverse()?;
    let rest: Vec<usize> = (1..dim).collect();
    let quotients: Vec<Matrix<Rational>> = gens
        .iter()
        .map(|g| p_inv.mul(g).mul(&p).submatrix(&rest, &rest))
        .collect();
    let inner = flag_basis(&quotients, dim - 1, stage + 1)?;
    let lift = Matrix::from_fn(dim, dim, |i, j| match (i, j) {
        (0, 0) => Rational::one(),
        (0, _) | (_, 0) => Rational::zero(),
        _ => inner.get(i - 1, j - 1).clone(),
    });
    Ok(p.mul(&lift))
}

/// Builds the flag by peeling off a common kernel vector and recursing on the
/// quotient. Fails with the stage (1-based) where the common kernel vanished.
pub fn triangularize_family(family: &MatrixFamily) -> Result<TriangularizingBasis> {
    let s = flag_basis(family.generators(), family.dim(), 1)?;
    let s_inv = s.inverse()?;
    let basis = TriangularizingBasis { s, s_inv };
    if !basis.verify(family) {
        return Err(Error::ClaimFailed {
            claim: "strict upper triangular conjugation",
            detail: format!("S = {}", basis.s),
        });
    }
    Ok(basis)
}

/// `f - id` component `i` depends only on `x_j` with `j > i`.
pub fn is_unit_upper_triangular_map(f: &PolyMap) -> bool {
    f.perturbation()
        .components()
        .iter()
        .enumerate()
        .all(|(i, c)| (0..=i).all(|j| !c.depends_on(j)))
}

/// Returns `S` and `S^{-1} ∘ f ∘ S`, checked to be unit upper triangular.
pub fn triangularize_map(f: &PolyMap) -> Result<(TriangularizingBasis, PolyMap)> {
    let basis = triangularize_family(&coefficient_family(&f.perturbation()))?;
    let t = f.conjugate_linear(basis.matrix())?;
    if !is_unit_upper_triangular_map(&t) {
        return Err(Error::ClaimFailed {
            claim: "triangular map form",
            detail: t.render(),
        });
    }
    Ok((basis, t))
}

/// Translation-dilation `x -> a + lambda x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dilation {
    pub shift: Vec<Rational>,
    pub factor: Rational,
}

impl Dilation {
    pub fn identity(n: usize) -> Self {
        Dilation { shift: vec![Rational::zero(); n], factor: Rational::one() }
    }

    pub fn as_map(&self) -> PolyMap {
        PolyMap::new(
            self.shift
                .iter()
                .enumerate()
                .map(|(i, a)| &Poly::constant(a.clone()) + &Poly::var(i).scale(&self.factor))
                .collect(),
        )
        .expect("dilation components are affine in x1..xn")
    }

    pub fn random(rng: &mut SeededRng, n: usize) -> Self {
        let mut factor = Rational::zero();
        while factor.is_zero() {
            factor = random_rational(rng, 5, 4);
        }
        Dilation { shift: (0..n).map(|_| random_rational(rng, 5, 4)).collect(), factor }
    }
}

/// `h ∘ τ_1 ∘ h ∘ τ_2 ∘ ... ∘ h ∘ τ_k` is a constant map.
pub fn composition_product_constant(h: &PolyMap, dilations: &[Dilation], cap: usize) -> Result<bool> {
    let mut acc = PolyMap::identity(h.dim());
    for tau in dilations.iter().rev() {
        acc = tau.as_map().compose_capped(&acc, cap)?;
        acc = h.compose_capped(&acc, cap)?;
    }
    Ok(acc.is_constant())
}

/// Smallest `r <= max_len` such that every product of `r` generators is zero.
pub fn family_nilpotence_index(family: &MatrixFamily, max_len: usize) -> Option<usize> {
    if family.is_zero_family() {
        return Some(1);
    }
    let gens: Vec<&Matrix<Rational>> = family.generators().iter().filter(|g| !g.is_zero()).collect();
    let mut layer: HashSet<Matrix<Rational>> = gens.iter().map(|g| (*g).clone()).collect();
    for r in 2..=max_len {
        let mut next = HashSet::new();
        for p in &layer {
            for g in &gens {
                let q = p.mul(g);
                if !q.is_zero() {
                    next.insert(q);
                }
            }
        }
        if next.is_empty() {
            return Some(r);
        }
        layer = next;
    }
    None
}

fn random_invertible(rng: &mut SeededRng, n: usize) -> Matrix<Rational> {
    loop {
        let p = Matrix::from_fn(n, n, |_, _| random_rational(rng, 3, 2));
        if !p.det_gauss().is_zero() {
            return p;
        }
    }
}

/// Strictly upper triangular generators conjugated by a random invertible
/// rational matrix `P`; returns the family and `P`.
pub fn random_conjugated_family(rng: &mut SeededRng, n: usize, count: usize) -> (MatrixFamily, Matrix<Rational>) {
    let gens: Vec<Matrix<Rational>> = (0..count)
        .map(|_| {
            Matrix::from_fn(n, n, |i, j| {
                if j > i && rng.gen_bool(0.7) {
                    random_rational(rng, 4, 3)
                } else {
                    Rational::zero()
                }
            })
        })
        .collect();
    let p = random_invertible(rng, n);
    let family = MatrixFamily::new(n, gens).expect("square generators").conjugated(&p).expect("P invertible");
    (family, p)
}
