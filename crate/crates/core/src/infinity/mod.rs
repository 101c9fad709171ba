//! Leading forms, zeros at infinity and fixed-point uniqueness for
//! polynomial maps.
//!
//! Common real zeros of two binary forms are decided exactly: the direction
//! `(1, 0)` is checked directly and the rest dehomogenize to `y = 1`, where
//! a common zero is a real root of a univariate gcd. In three or more
//! variables the search is numeric and labelled as such.

mod sturm;

pub use sturm::{real_roots, simplest_rational, sturm_count, Endpoint, RealRoot, SturmChain, UniPoly};

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::expr::{ExprMap, Number, Poly, PolyMap, Rational};
use crate::inversion::{fixed_point_iterate, newton_fixed_points, FixedPointSearch};
use crate::jacobian::is_nilpotent_exact;
use crate::matrix::Matrix;
use crate::numeric::{distance, norm, seeded_rng, uniform_point};

#[derive(Clone, Debug, PartialEq)]
pub struct LeadingFormSet {
    /// Total degree per component; `None` for a zero component.
    pub degrees: Vec<Option<u32>>,
    /// Algebraic degree `max d_i` (`None` for the zero map).
    pub degree: Option<u32>,
    /// Top-degree slice of each component.
    pub leading: Vec<Poly>,
    /// Degree-`d` slice of each component, zero when `d_i < d`.
    pub top: Vec<Poly>,
}

pub fn leading_forms(f: &PolyMap) -> LeadingFormSet {
    let degrees: Vec<Option<u32>> = f.components().iter().map(Poly::degree).collect();
    let degree = degrees.iter().flatten().copied().max();
    let leading = f
        .components()
        .iter()
        .zip(&degrees)
        .map(|(c, d)| d.map_or_else(Poly::zero, |d| c.homogeneous_part(d)))
        .collect();
    let top = f
        .components()
        .iter()
        .map(|c| degree.map_or_else(Poly::zero, |d| c.homogeneous_part(d)))
        .collect();
    LeadingFormSet { degrees, degree, leading, top }
}

/// A nontrivial real direction on which forms vanish: either exact, or
/// `(x, 1)` with `x` isolated in `(lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroDirection {
    Exact(Vec<Rational>),
    Isolated { lo: Rational, hi: Rational },
}

impl ZeroDirection {
    pub fn approx(&self) -> Vec<f64> {
        match self {
            ZeroDirection::Exact(v) => v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            ZeroDirection::Isolated { lo, hi } => {
                vec![RealRoot::Isolated { lo: lo.clone(), hi: hi.clone() }.approx(), 1.0]
            }
        }
    }
}

impl fmt::Display for ZeroDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroDirection::Exact(v) => {
                let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
            ZeroDirection::Isolated { lo, hi } => write!(f, "(x, 1) with x in ({lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RandallVerdict {
    ProvenHolds,
    ProvenFails { direction: ZeroDirection },
}

impl RandallVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, RandallVerdict::ProvenHolds)
    }
}

fn root_width() -> Rational {
    Rational::new(1.into(), (1i64 << 40).into())
}

/// First common nontrivial real zero of binary forms (zero forms allowed).
fn common_zero_2(forms: &[&Poly]) -> Result<Option<ZeroDirection>> {
    let e1 = [Rational::one(), Rational::zero()];
    if forms.iter().all(|l| l.eval(&e1).map(|v| v.is_zero()).unwrap_or(false)) {
        return Ok(Some(ZeroDirection::Exact(e1.to_vec())));
    }
    // Remaining directions are (x, 1) up to scaling.
    let mut g = UniPoly::zero();
    for l in forms {
        let p = l.substitute(&[Poly::var(0), Poly::one()]);
        g = g.gcd(&UniPoly::from_poly(&p, 0)?);
    }
    if g.is_zero() {
        // Every form vanishes identically.
        return Ok(Some(ZeroDirection::Exact(vec![Rational::zero(), Rational::one()])));
    }
    if g.degree() == Some(0) {
        return Ok(None);
    }
    Ok(real_roots(&g, &root_width())?.into_iter().next().map(|r| match r {
        RealRoot::Exact(x) => ZeroDirection::Exact(vec![x, Rational::one()]),
        RealRoot::Isolated { lo, hi } => ZeroDirection::Isolated { lo, hi },
    }))
}

fn require_dim(f: &PolyMap, n: usize) -> Result<()> {
    if f.dim() != n {
        return Err(Error::Precondition(format!("needs n = {n}, got n = {}", f.dim())));
    }
    Ok(())
}

/// Do the leading forms of a planar map share a nontrivial real zero? A
/// form that is identically zero imposes no condition, so the verdict then
/// rests on the other form alone.
pub fn randall_condition_n2(f: &PolyMap) -> Result<RandallVerdict> {
    require_dim(f, 2)?;
    let forms = leading_forms(f);
    if forms.degrees.iter().any(|d| d.unwrap_or(1) == 0) {
        return Err(Error::Precondition("leading forms must have degree at least 1".into()));
    }
    let refs: Vec<&Poly> = forms.leading.iter().collect();
    Ok(match common_zero_2(&refs)? {
        None => RandallVerdict::ProvenHolds,
        Some(direction) => RandallVerdict::ProvenFails { direction },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum InfinityVerdict {
    /// Algebraic degree 0 (constant map or zero map).
    Vacuous,
    ProvenNone,
    ProvenZero { direction: ZeroDirection },
    /// `n >= 3`: smallest value of `sum L_i^2` over the unit sphere found
    /// from the restarts stays above the threshold.
    ProbablyNone { min_value: f64, restarts: usize },
    NumericZero { direction: Vec<f64>, value: f64 },
    Inconclusive { min_value: f64 },
}

impl InfinityVerdict {
    pub fn no_zeros(&self) -> bool {
        matches!(self, InfinityVerdict::Vacuous | InfinityVerdict::ProvenNone)
    }

    pub fn is_heuristic(&self) -> bool {
        matches!(
            self,
            InfinityVerdict::ProbablyNone { .. } | InfinityVerdict::NumericZero { .. } | InfinityVerdict::Inconclusive { .. }
        )
    }
}

impl fmt::Display for InfinityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfinityVerdict::Vacuous => write!(f, "no zeros at infinity (degree 0)"),
            InfinityVerdict::ProvenNone => write!(f, "no zeros at infinity (exact)"),
            InfinityVerdict::ProvenZero { direction } => write!(f, "zero at infinity in direction {direction}"),
            InfinityVerdict::ProbablyNone { min_value, restarts } => {
                write!(f, "probably no zeros at infinity (heuristic: min {min_value:e} over {restarts} restarts)")
            }
            InfinityVerdict::NumericZero { direction, value } => {
                write!(f, "zero at infinity (numeric witness {direction:?}, value {value:e})")
            }
            InfinityVerdict::Inconclusive { min_value } => write!(f, "inconclusive (min {min_value:e})"),
        }
    }
}

/// Common nontrivial zeros of the degree-`d` forms of all components.
pub fn no_zeros_at_infinity(f: &PolyMap, cfg: &RunConfig) -> Result<InfinityVerdict> {
    let forms = leading_forms(f);
    let d = match forms.degree {
        None | Some(0) => return Ok(InfinityVerdict::Vacuous),
        Some(d) => d,
    };
    match f.dim() {
        1 => Ok(InfinityVerdict::ProvenNone),
        2 => {
            let refs: Vec<&Poly> = forms.top.iter().collect();
            Ok(match common_zero_2(&refs)? {
                None => InfinityVerdict::ProvenNone,
                Some(direction) => InfinityVerdict::ProvenZero { direction },
            })
        }
        n => Ok(sphere_search(&forms.top, n, d, cfg)),
    }
}

/// Projected gradient descent on `sum L_i^2` restricted to the unit sphere.
fn sphere_search(forms: &[Poly], n: usize, _d: u32, cfg: &RunConfig) -> InfinityVerdict {
    let grads: Vec<Vec<Poly>> = forms.iter().map(|l| (0..n).map(|j| l.partial(j)).collect()).collect();
    let value = |x: &[f64]| -> f64 {
        forms.iter().map(|l| l.eval(x).unwrap_or(f64::NAN).powi(2)).sum()
    };
    let gradient = |x: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; n];
        for (l, gl) in forms.iter().zip(&grads) {
            let v = l.eval(x).unwrap_or(f64::NAN);
            for (gj, p) in g.iter_mut().zip(gl) {
                *gj += 2.0 * v * p.eval(x).unwrap_or(f64::NAN);
            }
        }
        g
    };
    let unit = |x: Vec<f64>| -> Vec<f64> {
        let r = norm(&x);
        x.into_iter().map(|v| v / r).collect()
    };
    let mut rng = seeded_rng(cfg.seed);
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for _ in 0..cfg.infinity_restarts {
        let mut x = unit(uniform_point(&mut rng, n, -1.0, 1.0));
        let mut fx = value(&x);
        let mut step = 1.0;
        for _ in 0..2000 {
            let g = gradient(&x);
            // Tangential component only.
            let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
            let t: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - radial * b).collect();
            if norm(&t) < 1e-16 {
                break;
            }
            let mut accepted = false;
            while step > 1e-14 {
                let trial = unit(x.iter().zip(&t).map(|(a, b)| a - step * b).collect());
                let ft = value(&trial);
                if ft < fx {
                    x = trial;
                    fx = ft;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step /= 2.0;
            }
            if !accepted || fx < cfg.infinity_zero_threshold * 1e-6 {
                break;
            }
        }
        if fx < best.0 {
            best = (fx, x);
        }
    }
    let (min_value, direction) = best;
    if min_value > cfg.infinity_none_threshold {
        InfinityVerdict::ProbablyNone { min_value, restarts: cfg.infinity_restarts }
    } else if min_value < cfg.infinity_zero_threshold {
        InfinityVerdict::NumericZero { direction, value: min_value }
    } else {
        InfinityVerdict::Inconclusive { min_value }
    }
}

/// `Some(+1)` / `Some(-1)` when a quick sufficient test shows `p` is
/// positive / negative everywhere: nonzero constant term and every other
/// term an even monomial with a coefficient of the same sign.
pub fn definite_sign(p: &Poly) -> Option<i8> {
    let c = p.constant_term();
    if c.is_zero() {
        return None;
    }
    let positive = c.is_positive();
    let ok = p.terms().all(|(m, a)| {
        m.exponents().iter().all(|e| e % 2 == 0) && (a.is_positive() == positive)
    });
    ok.then_some(if positive { 1 } else { -1 })
}

/// Nowhere-vanishing Jacobian determinant plus leading forms without a
/// common zero: Randall's diffeomorphism criterion for planar maps.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeomorphismReport {
    pub jacobian_det: Poly,
    /// Result of [`definite_sign`] on the determinant.
    pub det_sign: Option<i8>,
    pub randall: RandallVerdict,
}

impl DiffeomorphismReport {
    pub fn certified(&self) -> bool {
        self.det_sign.is_some() && self.randall.holds()
    }
}

pub fn diffeomorphism_check(f: &PolyMap) -> Result<DiffeomorphismReport> {
    require_dim(f, 2)?;
    let jacobian_det = f.jacobian().det();
    let det_sign = definite_sign(&jacobian_det);
    let randall = randall_condition_n2(f)?;
    Ok(DiffeomorphismReport { jacobian_det, det_sign, randall })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    /// `J(f)` never has eigenvalue 1.
    NoEigenvalueOne,
    /// No zeros at infinity, or leading forms of degree > 1 without a
    /// common zero.
    ControlAtInfinity,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::NoEigenvalueOne => write!(f, "(i) J(f) has no eigenvalue 1"),
            Hypothesis::ControlAtInfinity => write!(f, "(ii) no zeros at infinity"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateBasis {
    ConstantMap,
    /// Degree 1: `x - f(x)` is affine with invertible linear part.
    AffineMap,
    NoZerosAtInfinity,
    /// All leading forms have degree > 1 and no common nontrivial zero.
    LeadingForms,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniqueFixedPointCertificate {
    pub basis: CertificateBasis,
    /// `det(J(f) - I)`, a nonzero constant, or `None` when nilpotence of
    /// `J(f)` was used instead.
    pub det_j_minus_i: Option<Rational>,
    /// The fixed point, when it is available in closed form (degree <= 1).
    pub exact_point: Option<Vec<Rational>>,
    /// Numeric corroboration.
    pub search: FixedPointSearch,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Uniqueness {
    Certified(UniqueFixedPointCertificate),
    NotApplicable { hypothesis: Hypothesis, detail: String },
}

fn eigenvalue_one_free(f: &PolyMap) -> Result<std::result::Result<Option<Rational>, String>> {
    let n = f.dim();
    let shifted = f.jacobian().sub(&Matrix::identity(n));
    let det = shifted.det();
    if det.is_constant() && !det.is_zero() {
        return Ok(Ok(Some(det.constant_term())));
    }
    if is_nilpotent_exact(f).is_proven() {
        return Ok(Ok(None));
    }
    Ok(Err(format!("det(J(f) - I) = {det} is not a nonzero constant")))
}

/// Checks the hypotheses of the two uniqueness theorems, exactly where
/// decidable, and corroborates with a multi-start Newton search.
pub fn unique_fixed_point_via_randall(f: &PolyMap, cfg: &RunConfig) -> Result<Uniqueness> {
    let n = f.dim();
    let det = match eigenvalue_one_free(f)? {
        Ok(det) => det,
        Err(detail) => return Ok(Uniqueness::NotApplicable { hypothesis: Hypothesis::NoEigenvalueOne, detail }),
    };
    let forms = leading_forms(f);
    let (basis, exact_point) = match forms.degree {
        None | Some(0) => {
            let c: Vec<Rational> = f.components().iter().map(Poly::constant_term).collect();
            (CertificateBasis::ConstantMap, Some(c))
        }
        Some(1) => {
            // x = Lx + c  <=>  (I - L) x = c.
            let l = f.jacobian_at(&vec![Rational::zero(); n])?;
            let c: Vec<Rational> = f.components().iter().map(Poly::constant_term).collect();
            let inv = Matrix::identity(n).sub(&l).inverse()?;
            (CertificateBasis::AffineMap, Some(inv.mul_vec(&c)))
        }
        Some(_) => {
            let infinity = no_zeros_at_infinity(f, cfg)?;
            if infinity.no_zeros() {
                (CertificateBasis::NoZerosAtInfinity, None)
            } else if n == 2
                && forms.degrees.iter().all(|d| d.unwrap_or(0) > 1)
                && randall_condition_n2(f)?.holds()
            {
                (CertificateBasis::LeadingForms, None)
            } else {
                let detail = if infinity.is_heuristic() {
                    format!("n = {n}: only a numeric search is available ({infinity})")
                } else {
                    infinity.to_string()
                };
                return Ok(Uniqueness::NotApplicable { hypothesis: Hypothesis::ControlAtInfinity, detail });
            }
        }
    };
    let search = newton_fixed_points(&ExprMap::from(f), cfg)?;
    Ok(Uniqueness::Certified(UniqueFixedPointCertificate { basis, det_j_minus_i: det, exact_point, search }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedImageReport {
    /// Distinct fixed points found by iteration and Newton.
    pub points: Vec<Vec<f64>>,
    /// Per point: largest characteristic coefficient of `J(f)` there, so
    /// values near zero indicate a nilpotent Jacobian.
    pub nilpotence_gap: Vec<f64>,
    pub starts: usize,
    pub seed: u64,
}

/// Multi-start iteration and Newton search for a map whose range the caller
/// asserts is bounded.
pub fn bounded_image_fixed_points(f: &ExprMap, cfg: &RunConfig) -> Result<BoundedImageReport> {
    let n = f.dim();
    let mut points = newton_fixed_points(f, cfg)?.points;
    let mut rng = seeded_rng(cfg.seed ^ 0xb0);
    let (lo, hi) = cfg.newton_box;
    for _ in 0..cfg.newton_starts {
        let start = uniform_point(&mut rng, n, lo, hi);
        let out = fixed_point_iterate(f, &start, cfg.fixed_point_max_iter, cfg.fixed_point_tol, cfg.divergence_threshold)?;
        if let Some(p) = out.point() {
            if points.iter().all(|q| distance(q, p) > cfg.newton_separation) {
                points.push(p.to_vec());
            }
        }
    }
    let jac = f.jacobian();
    let nilpotence_gap = points
        .iter()
        .map(|p| {
            let j = crate::expr::eval_matrix(&jac, p, f.phi())?;
            Ok(j.char_poly_coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BoundedImageReport { points, nilpotence_gap, starts: 2 * cfg.newton_starts, seed: cfg.seed })
}

/// Renders a direction for reports.
pub fn direction_numbers(d: &ZeroDirection) -> Vec<Number> {
    match d {
        ZeroDirection::Exact(v) => v.iter().cloned().map(Number::Exact).collect(),
        ZeroDirection::Isolated { .. } => d.approx().into_iter().map(Number::Float).collect(),
    }
}

#[cfg(test)]
mod tests;
