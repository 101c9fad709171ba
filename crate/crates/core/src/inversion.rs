//! Inversion through composition powers and fixed points.
//!
//! For `f = id + h` and a target `y`, put `tau_y(w) = y - h(w)`. The fixed
//! points of `tau_y` are exactly the preimages of `y`, and when some power
//! `tau_y^{∘m}` is constant its value is `f^{-1}(y)`, reached from any start.

use std::fmt;

use num_traits::Zero;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::expr::{eval_matrix, Expr, ExprMap, Number, Poly, PolyMap, Rational, Scalar};
use crate::matrix::Matrix;
use crate::numeric::{damped_newton, polish_newton, distance, norm, seeded_rng, uniform_point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InversionMethod {
    SymbolicPower(u32),
    NumericPower { power: u32, starts: usize },
    ClosedFormPlanar,
}

impl fmt::Display for InversionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InversionMethod::SymbolicPower(m) => write!(f, "symbolic power m = {m}"),
            InversionMethod::NumericPower { power, starts } => {
                write!(f, "power iteration m = {power} from {starts} starts")
            }
            InversionMethod::ClosedFormPlanar => write!(f, "planar closed form"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InversionResult {
    pub point: Vec<Number>,
    pub method: InversionMethod,
    /// `|f(x) - y|`; exactly zero on the rational path.
    pub residual: f64,
}

/// `g_a(x) = x - f(x) + a`. Its fixed points are the preimages `f^{-1}(a)`.
pub fn g_family(f: &ExprMap, a: &[Rational]) -> Result<ExprMap> {
    if a.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: a.len() });
    }
    let comps = f
        .components()
        .iter()
        .zip(a)
        .enumerate()
        .map(|(i, (fi, ai))| Expr::sum(vec![Expr::Var(i), Expr::negate(fi.clone()), Expr::Const(ai.clone())]))
        .collect();
    ExprMap::new(comps, f.phi().cloned())
}

/// Outcome of composing `tau_y` with symbolic `y`.
#[derive(Clone, Debug, PartialEq)]
pub enum PowerSearch {
    /// `tau_y^{∘power}` no longer depends on `w`; `inverse` is the resulting
    /// formula for `f^{-1}`.
    Constant { power: u32, inverse: PolyMap },
    NotWithin { max_power: u32 },
    /// Composition stopped at `power` when a polynomial outgrew the cap.
    /// Not a disproof.
    CapReached { power: u32, terms: usize },
}

impl PowerSearch {
    pub fn constant_power(&self) -> Option<u32> {
        match self {
            PowerSearch::Constant { power, .. } => Some(*power),
            _ => None,
        }
    }
}

/// Smallest `m <= max_power` with `tau_y^{∘m}` constant in `w`, where `y`
/// is carried as `n` extra variables.
pub fn symbolic_power_constancy(h: &PolyMap, max_power: u32, cap: usize) -> Result<PowerSearch> {
    let n = h.dim();
    // Variables 0..n are w, n..2n are y; y is passed through unchanged.
    let mut comps = Vec::with_capacity(2 * n);
    for (i, hi) in h.components().iter().enumerate() {
        comps.push(Poly::var(n + i) - hi);
    }
    comps.extend((0..n).map(|i| Poly::var(n + i)));
    let tau = PolyMap::new(comps)?;
    let mut acc = tau.clone();
    for power in 1..=max_power {
        if power > 1 {
            acc = match tau.compose_capped(&acc, cap) {
                Ok(next) => next,
                Err(Error::ResourceCap { count, .. }) => {
                    return Ok(PowerSearch::CapReached { power, terms: count })
                }
                Err(e) => return Err(e),
            };
        }
        let free = acc.components()[..n].iter().all(|c| (0..n).all(|v| !c.depends_on(v)));
        if free {
            let inverse = acc.components()[..n].iter().map(|c| c.map_vars(|v| v - n)).collect();
            return Ok(PowerSearch::Constant { power, inverse: PolyMap::new(inverse)? });
        }
    }
    Ok(PowerSearch::NotWithin { max_power })
}

fn tau_power<S: Scalar>(f: &ExprMap, y: &[S], start: Vec<S>, m: u32) -> Result<Vec<S>> {
    let mut w = start;
    for _ in 0..m {
        let fw = f.evaluate(&w)?;
        w = y
            .iter()
            .zip(&w)
            .zip(fw)
            .map(|((yi, wi), fi)| yi.clone() + wi.clone() - fi)
            .collect();
    }
    Ok(w)
}

fn gap<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).approx_f64().abs())
        .fold(0.0, f64::max)
}

fn check_len(f: &ExprMap, y_len: usize) -> Result<()> {
    if y_len != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: y_len });
    }
    Ok(())
}

/// Applies `tau_y` `m` times from the origin and from `(1, ..., 1)`. Both
/// runs must agree within `tol` and land on a preimage of `y`.
pub fn invert_by_power(f: &ExprMap, y: &[f64], m: u32, tol: f64) -> Result<InversionResult> {
    check_len(f, y.len())?;
    let n = f.dim();
    let a = tau_power(f, y, vec![0.0; n], m)?;
    let b = tau_power(f, y, vec![1.0; n], m)?;
    let spread = distance(&a, &b);
    if !(spread <= tol) {
        return Err(Error::ConstancyNotReached { gap: spread });
    }
    let residual = distance(&f.evaluate(&a)?, y);
    if !(residual <= tol) {
        return Err(Error::NotAnInverse { residual });
    }
    Ok(InversionResult {
        point: a.into_iter().map(Number::Float).collect(),
        method: InversionMethod::NumericPower { power: m, starts: 2 },
        residual,
    })
}

/// Rational counterpart of [`invert_by_power`]: agreement and `f(x) = y`
/// must hold exactly.
pub fn invert_by_power_exact(f: &ExprMap, y: &[Rational], m: u32) -> Result<InversionResult> {
    check_len(f, y.len())?;
    let n = f.dim();
    let a = tau_power(f, y, vec![Rational::from_integer(0.into()); n], m)?;
    let b = tau_power(f, y, vec![Rational::from_integer(1.into()); n], m)?;
    if a != b {
        return Err(Error::ConstancyNotReached { gap: gap(&a, &b) });
    }
    let fa = f.evaluate(&a)?;
    if fa != y {
        return Err(Error::NotAnInverse { residual: gap(&fa, y) });
    }
    Ok(InversionResult {
        point: a.into_iter().map(Number::Exact).collect(),
        method: InversionMethod::NumericPower { power: m, starts: 2 },
        residual: 0.0,
    })
}

/// Finds the constancy power symbolically, then evaluates the inverse
/// formula at `y` and checks `f(x) = y` exactly.
pub fn invert_auto(f: &PolyMap, y: &[Rational], cfg: &RunConfig) -> Result<InversionResult> {
    if y.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: y.len() });
    }
    let max_power = (cfg.power_cap_factor * f.dim()) as u32;
    match symbolic_power_constancy(&f.perturbation(), max_power, cfg.power_term_cap)? {
        PowerSearch::Constant { power, inverse } => {
            let x = inverse.evaluate(y)?;
            let fx = f.evaluate(&x)?;
            if fx != y {
                return Err(Error::NotAnInverse { residual: gap(&fx, y) });
            }
            Ok(InversionResult {
                point: x.into_iter().map(Number::Exact).collect(),
                method: InversionMethod::SymbolicPower(power),
                residual: 0.0,
            })
        }
        PowerSearch::NotWithin { max_power } => Err(Error::Precondition(format!(
            "no constant composition power up to m = {max_power}"
        ))),
        PowerSearch::CapReached { terms, .. } => Err(Error::ResourceCap {
            what: "composition power terms",
            count: terms,
            cap: cfg.power_term_cap,
        }),
    }
}

fn require_planar(f: &ExprMap) -> Result<()> {
    if f.dim() != 2 {
        return Err(Error::Precondition(format!("planar formulas need n = 2, got n = {}", f.dim())));
    }
    Ok(())
}

fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

fn plus<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

fn neg<S: Scalar>(a: &[S]) -> Vec<S> {
    a.iter().map(|x| -x.clone()).collect()
}

/// The two universal planar inverses, with `g(w) = w - f(w)`:
/// `z + g(z + g(z))` and `z - f(-z) - f(-f(-z))`.
pub fn planar_inverse_closed_forms<S: Scalar>(f: &ExprMap, z: &[S]) -> Result<[Vec<S>; 2]> {
    require_planar(f)?;
    check_len(f, z.len())?;
    let g = |w: &[S]| -> Result<Vec<S>> { Ok(sub(w, &f.evaluate(w)?)) };
    let first = plus(z, &g(&plus(z, &g(z)?))?);
    let f_neg_z = f.evaluate(&neg(z))?;
    let second = sub(&sub(z, &f_neg_z), &f.evaluate(&neg(&f_neg_z))?);
    Ok([first, second])
}

/// Evaluates both closed forms and checks that they agree and invert `f`
/// within `tol` (`tol = 0` demands exact equality). A failure means the
/// caller's unipotence certificate was wrong.
pub fn planar_inverse<S: Scalar>(f: &ExprMap, z: &[S], tol: f64) -> Result<InversionResult> {
    let [a, b] = planar_inverse_closed_forms(f, z)?;
    let close = |p: &[S], q: &[S]| if tol == 0.0 { p == q } else { gap(p, q) <= tol };
    if !close(&a, &b) {
        return Err(Error::ClaimFailed {
            claim: "unipotent Jacobian (planar closed forms disagree)",
            detail: format!("gap {:e}", gap(&a, &b)),
        });
    }
    let fa = f.evaluate(&a)?;
    if !close(&fa, z) {
        return Err(Error::ClaimFailed {
            claim: "unipotent Jacobian (closed form is not an inverse)",
            detail: format!("residual {:e}", gap(&fa, z)),
        });
    }
    Ok(InversionResult {
        residual: gap(&fa, z),
        point: a.into_iter().map(exact_or_float).collect(),
        method: InversionMethod::ClosedFormPlanar,
    })
}

fn exact_or_float<S: Scalar>(v: S) -> Number {
    match S::as_rational(&v) {
        Some(r) => Number::Exact(r),
        None => Number::Float(v.approx_f64()),
    }
}

/// Both closed forms as polynomial maps.
pub fn planar_inverse_symbolic(f: &PolyMap) -> Result<[PolyMap; 2]> {
    if f.dim() != 2 {
        return Err(Error::Precondition(format!("planar formulas need n = 2, got n = {}", f.dim())));
    }
    let id = PolyMap::identity(2);
    let g = id.sub(f);
    let first = id.add(&g.compose(&id.add(&g))?);
    let minus = id.scale(&Rational::from_integer((-1).into()));
    let f_neg = f.compose(&minus)?;
    let second = id.sub(&f_neg).sub(&f.compose(&f_neg.scale(&Rational::from_integer((-1).into())))?);
    Ok([first, second])
}

#[derive(Clone, Debug, PartialEq)]
pub enum IterationOutcome {
    /// `|h(p) - p| < tol`.
    Converged { point: Vec<f64>, iterations: usize },
    /// The iterate left the divergence radius or became non-finite.
    Diverged { last: Vec<f64>, iterations: usize },
    NotConverged { last: Vec<f64>, step: f64 },
}

impl IterationOutcome {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            IterationOutcome::Converged { point, .. } => Some(point),
            _ => None,
        }
    }
}

/// Plain iteration `x <- h(x)`.
pub fn fixed_point_iterate(
    h: &ExprMap,
    start: &[f64],
    max_iter: usize,
    tol: f64,
    divergence: f64,
) -> Result<IterationOutcome> {
    check_len(h, start.len())?;
    let mut x = start.to_vec();
    let mut step = f64::INFINITY;
    for it in 1..=max_iter {
        let next = h.evaluate(&x)?;
        let r = norm(&next);
        if !r.is_finite() || r > divergence {
            return Ok(IterationOutcome::Diverged { last: next, iterations: it });
        }
        step = distance(&next, &x);
        x = next;
        if step < tol {
            return Ok(IterationOutcome::Converged { point: x, iterations: it });
        }
    }
    Ok(IterationOutcome::NotConverged { last: x, step })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointSearch {
    /// Distinct fixed points, pairwise farther apart than the separation.
    pub points: Vec<Vec<f64>>,
    pub starts: usize,
    pub converged: usize,
    pub seed: u64,
}

/// Damped Newton on `x - f(x) = 0` from `cfg.newton_starts` seeded uniform
/// starts in `cfg.newton_box`.
pub fn newton_fixed_points(f: &ExprMap, cfg: &RunConfig) -> Result<FixedPointSearch> {
    let n = f.dim();
    let jac = f.jacobian();
    let phi = f.phi();
    let g = |x: &[f64]| -> Result<Vec<f64>> { Ok(sub(x, &f.evaluate(x)?)) };
    let dg = |x: &[f64]| -> Result<Matrix<f64>> {
        let j = eval_matrix(&jac, x, phi)?;
        Ok(Matrix::identity(n).sub(&j))
    };
    let mut rng = seeded_rng(cfg.seed);
    let (lo, hi) = cfg.newton_box;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut converged = 0;
    for _ in 0..cfg.newton_starts {
        let start = uniform_point(&mut rng, n, lo, hi);
        if let Some(out) = damped_newton(&g, &dg, &start, cfg.newton_tol, 200) {
            converged += 1;
            let p = polish_newton(&g, &dg, out.point, 1e-3 * cfg.newton_separation, 200);
            if points.iter().all(|q| distance(q, &p) > cfg.newton_separation) {
                points.push(p);
            }
        }
    }
    Ok(FixedPointSearch { points, starts: cfg.newton_starts, converged, seed: cfg.seed })
}

/// A fixed point `p` is non-degenerate, hence isolated, when
/// `det(J(f)(p) - I) != 0`.
pub fn isolated_fixed_point_check(f: &PolyMap, p: &[Rational]) -> Result<bool> {
    if f.evaluate(p)? != p {
        return Err(Error::Precondition("the point is not fixed by the map".into()));
    }
    let j = f.jacobian_at(p)?;
    Ok(!j.sub(&Matrix::identity(f.dim())).det_gauss().is_zero())
}
