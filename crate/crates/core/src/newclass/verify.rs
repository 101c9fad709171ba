use num_traits::Zero;

use super::NewClassRecipe;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::expr::{ExprMap, Poly, PolyMap, Rational, Scalar};
use crate::jacobian::{is_nilpotent_exact, is_nilpotent_sampled, NilpotenceVerdict};
use crate::numeric::{distance, random_rational_point, seeded_rng, uniform_point};

#[derive(Clone, Debug, PartialEq)]
pub struct LevelReport {
    pub level: usize,
    /// The `level x level` leading principal submatrix of `J(h)` at this
    /// level has identically zero characteristic coefficients.
    pub principal_nilpotent: bool,
    /// `(h_v, z)` composed `level` times does not depend on the live
    /// variables.
    pub fibered_power_parametric: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimsReport {
    pub dim: usize,
    pub level: usize,
    pub nilpotent: bool,
    pub levels: Vec<LevelReport>,
    /// Value of the constant map `h^{∘n}`.
    pub power_value: Vec<Rational>,
    pub inverse_checks: usize,
}

fn fail<T>(claim: &'static str, detail: impl Into<String>) -> Result<T> {
    Err(Error::ClaimFailed { claim, detail: detail.into() })
}

fn fibered(map: &PolyMap, level: usize) -> PolyMap {
    let comps = (0..map.dim())
        .map(|k| if k < level { map.components()[k].clone() } else { Poly::var(k) })
        .collect();
    PolyMap::new(comps).expect("same variables as the level map")
}

/// Exact verification of nilpotence (overall and per level), constancy of
/// `h^{∘n}`, and the explicit inverse at `inverse_samples` seeded rational
/// points. Any failing claim is an error carrying the counterexample.
pub fn verify_claims(recipe: &NewClassRecipe, cfg: &RunConfig, inverse_samples: usize) -> Result<ClaimsReport> {
    if !recipe.is_polynomial() {
        return Err(Error::NotPolynomial("recipe has transcendental entries".into()));
    }
    let n = recipe.dim();
    let cap = cfg.monomial_cap;
    let levels = recipe.poly_levels()?;
    let h = levels.last().expect("at least one level").clone();

    let nilpotent = match is_nilpotent_exact(&h) {
        NilpotenceVerdict::ProvenNilpotent => true,
        v => return fail("J(h) nilpotent", v.to_string()),
    };

    let mut level_reports = Vec::new();
    for (idx, map) in levels.iter().enumerate() {
        let level = idx + 1;
        let idxs: Vec<usize> = (0..level).collect();
        let sub = map.jacobian().submatrix(&idxs, &idxs);
        if let Some(c) = sub.char_poly_coeffs().iter().find(|c| !c.is_zero()) {
            return fail("leading principal submatrix nilpotent", format!("level {level}: coefficient {c}"));
        }
        let power = fibered(map, level).compose_power(level as u32, cap)?;
        if let Some((k, c)) = power
            .components()
            .iter()
            .enumerate()
            .take(level)
            .find(|(_, c)| (0..level).any(|v| c.depends_on(v)))
        {
            return fail(
                "fibered composition power depends only on parameters",
                format!("level {level}: component {} = {c}", k + 1),
            );
        }
        level_reports.push(LevelReport { level, principal_nilpotent: true, fibered_power_parametric: true });
    }

    let power = h.compose_power(n as u32, cap)?;
    let power_value = match power.constant_value() {
        Some(v) => v,
        None => return fail("h composed n times is constant", power.render()),
    };

    let f = h.plus_identity();
    let mut rng = seeded_rng(cfg.seed);
    for _ in 0..inverse_samples {
        let x = random_rational_point(&mut rng, n, 20, 7);
        let y = f.evaluate(&x)?;
        let back = invert_exact(&h, &y)?;
        if back != x {
            return fail("explicit inverse", format!("f^-1(f(x)) != x at x = {x:?}"));
        }
    }

    Ok(ClaimsReport {
        dim: n,
        level: recipe.level(),
        nilpotent,
        levels: level_reports,
        power_value,
        inverse_checks: inverse_samples,
    })
}

/// Iterates `x -> y - h(x)` `n` times from the origin. For a New Class `h`
/// the result is `f^{-1}(y)` whatever the start.
pub fn invert<S: Scalar>(h: &ExprMap, y: &[S]) -> Result<Vec<S>> {
    let mut x = vec![S::zero(); h.dim()];
    for _ in 0..h.dim() {
        let hx = h.evaluate(&x)?;
        x = y.iter().zip(hx).map(|(a, b)| a.clone() - b).collect();
    }
    Ok(x)
}

/// Exact inverse with the check `f(x) = y`.
pub fn invert_exact(h: &PolyMap, y: &[Rational]) -> Result<Vec<Rational>> {
    let mut x = vec![Rational::zero(); h.dim()];
    for _ in 0..h.dim() {
        let hx = h.evaluate(&x)?;
        x = y.iter().zip(hx).map(|(a, b)| a - b).collect();
    }
    let hx = h.evaluate(&x)?;
    let fx: Vec<Rational> = x.iter().zip(hx).map(|(a, b)| a + b).collect();
    if fx != y {
        return fail("explicit inverse", format!("f(x) != y at y = {y:?}"));
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericClaimsReport {
    pub samples: usize,
    pub nilpotence: NilpotenceVerdict,
    /// Largest distance between values of `h^{∘n}` at different samples.
    pub power_spread: f64,
    /// Largest `|f^{-1}(f(x)) - x|` over the samples.
    pub inverse_residual: f64,
}

/// Sampled counterpart of [`verify_claims`] for recipes with
/// transcendental entries.
pub fn verify_claims_numeric(recipe: &NewClassRecipe, cfg: &RunConfig) -> Result<NumericClaimsReport> {
    let h = recipe.build()?;
    let n = h.dim();
    let nilpotence = is_nilpotent_sampled(&h, cfg);
    if nilpotence.is_negative() {
        return fail("J(h) nilpotent", nilpotence.to_string());
    }
    let mut rng = seeded_rng(cfg.seed);
    let (lo, hi) = cfg.sample_box;
    let mut first: Option<Vec<f64>> = None;
    let mut spread: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for _ in 0..cfg.numeric_constancy_samples {
        let p = uniform_point(&mut rng, n, lo, hi);
        let mut q = p.clone();
        for _ in 0..n {
            q = h.evaluate(&q)?;
        }
        match &first {
            None => first = Some(q),
            Some(v) => spread = spread.max(distance(v, &q)),
        }
        let hp = h.evaluate(&p)?;
        let y: Vec<f64> = p.iter().zip(hp).map(|(a, b)| a + b).collect();
        residual = residual.max(distance(&invert(&h, &y)?, &p));
    }
    if spread > cfg.numeric_constancy_tol {
        return fail("h composed n times is constant", format!("sampled spread {spread:e}"));
    }
    Ok(NumericClaimsReport {
        samples: cfg.numeric_constancy_samples,
        nilpotence,
        power_spread: spread,
        inverse_residual: residual,
    })
}
