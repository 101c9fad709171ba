//! `verify-example k`: the regression checks for each reference example.

use nilmap::config::RunConfig;
use nilmap::dynamics::{integrate_flow, iterate_map, spectral_report, verify_analytic_orbit};
use nilmap::fixtures;
use nilmap::inversion::{invert_by_power_exact, symbolic_power_constancy, PowerSearch};
use nilmap::jacobian::{is_nilpotent_exact, is_unipotent, is_unipotent_sampled, matrix_power_zero};
use nilmap::numeric::{distance, max_abs_diff, random_rational_point, seeded_rng, uniform_point};
use nilmap::triangular::{strongly_nilpotent_generic, triangularize_map};
use nilmap::{Matrix, Number, PolyMap, Rational, Result};

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn show(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn check(name: impl Into<String>, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check { name: name.into(), passed, detail }
}

pub fn verify(example: u8, cfg: &RunConfig) -> Vec<Check> {
    match example {
        1 => example1(cfg),
        2 => example2(cfg),
        3 => example3(cfg),
        4 => example4(cfg),
        5 => example5(cfg),
        _ => unreachable!("clap restricts the example number"),
    }
}

fn example1(cfg: &RunConfig) -> Vec<Check> {
    let f = fixtures::example1();
    let g = fixtures::example1_inverse();
    let mut out = Vec::new();
    let v = is_unipotent_sampled(&f, cfg);
    out.push(check("sampled unipotence", Ok((v.is_nilpotent_claim(), v.to_string()))));
    out.push(check(
        "inverse round trip at 100 points",
        (|| {
            let mut rng = seeded_rng(cfg.seed);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let x = uniform_point(&mut rng, 2, -10.0, 10.0);
                worst = worst.max(max_abs_diff(&f.evaluate(&g.evaluate(&x)?)?, &x));
                worst = worst.max(max_abs_diff(&g.evaluate(&f.evaluate(&x)?)?, &x));
            }
            Ok((worst < 1e-9, format!("max error {worst:e}")))
        })(),
    ));
    out.push(check(
        "universal planar formulas give the inverse",
        (|| {
            let mut rng = seeded_rng(cfg.seed ^ 1);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let y = uniform_point(&mut rng, 2, -10.0, 10.0);
                let [a, b] = nilmap::inversion::planar_inverse_closed_forms(&f, &y)?;
                let want = g.evaluate(&y)?;
                worst = worst.max(max_abs_diff(&a, &want)).max(max_abs_diff(&b, &want));
            }
            Ok((worst < 1e-9, format!("max error {worst:e}")))
        })(),
    ));
    out
}

fn example2(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for (k, fx) in fixtures::example2_fixtures().iter().enumerate() {
        let tag = format!("instance {}", k + 1);
        let f = match fx.map().to_poly() {
            Ok(f) => f,
            Err(e) => {
                out.push(check(tag, Err(e)));
                continue;
            }
        };
        let h = f.perturbation();
        let v = is_nilpotent_exact(&h);
        out.push(check(format!("{tag}: exact nilpotence"), Ok((v.is_proven(), v.to_string()))));
        out.push(check(
            format!("{tag}: strongly nilpotent"),
            strongly_nilpotent_generic(&h, cfg.monomial_cap).map(|s| (s.is_strong(), s.to_string())),
        ));
        out.push(check(
            format!("{tag}: triangularizing basis is the identity"),
            triangularize_map(&f).map(|(b, _)| {
                let id = b.matrix() == &Matrix::identity(4);
                let rows: Vec<String> = b.matrix().to_rows().iter().map(|r| show(r)).collect();
                (id, format!("S rows {}", rows.join(" ")))
            }),
        ));
        out.push(check(
            format!("{tag}: closed-form inverse equals power inversion (m = 4) at 50 points"),
            (|| {
                let g = fx.inverse();
                let map = fx.map();
                let mut rng = seeded_rng(cfg.seed + k as u64);
                for _ in 0..50 {
                    let y = random_rational_point(&mut rng, 4, 20, 7);
                    let want = g.evaluate(&y)?;
                    let got = invert_by_power_exact(&map, &y, 4)?;
                    let got: Vec<Rational> = got
                        .point
                        .iter()
                        .map(|x| match x {
                            Number::Exact(r) => r.clone(),
                            Number::Float(_) => unreachable!("exact inversion"),
                        })
                        .collect();
                    if got != want {
                        return Ok((false, format!("mismatch at y = {}", show(&y))));
                    }
                }
                Ok((true, "50 exact matches".into()))
            })(),
        ));
    }
    out
}

fn example3(cfg: &RunConfig) -> Vec<Check> {
    let f = fixtures::example3("-t^2");
    let mut out = Vec::new();
    let poly = f.to_poly();
    out.push(check(
        "exact unipotence",
        poly.clone().map(|p| {
            let v = is_unipotent(&p);
            (v.is_proven(), v.to_string())
        }),
    ));
    out.push(check(
        "h composed 3 times is the constant 0",
        poly.clone().and_then(|p| {
            let c = p.perturbation().compose_power(3, cfg.monomial_cap)?;
            Ok(match c.constant_value() {
                Some(v) => (v.iter().all(|x| x == &Rational::from_integer(0.into())), format!("value {}", show(&v))),
                None => (false, "not constant".into()),
            })
        }),
    ));
    out.push(check("exact inverse round trip at 50 points", poly.and_then(|p| round_trip(&p, 3, cfg.seed, 50))));
    out.push(check(
        "analytic orbit residual",
        verify_analytic_orbit(
            &f,
            &|t| fixtures::example3_orbit(t).to_vec(),
            &|t| fixtures::example3_orbit_derivative(t).to_vec(),
            &[0.0, 0.5, 1.0],
        )
        .map(|r| (r < 1e-9, format!("max residual {r:e}"))),
    ));
    out.push(check(
        "RK4 orbit at t = 1",
        integrate_flow(&f.negated(), &[18.0, -12.0, 1.0], 0.0, 2.0, 20000, cfg).map(|o| {
            let want = fixtures::example3_orbit(1.0);
            let got = o.at_time(1.0).expect("continuous orbit");
            let rel = distance(got, &want) / nilmap::numeric::norm(&want);
            (rel < 1e-6, format!("relative error {rel:e}"))
        }),
    ));
    out.push(check(
        "eigenvalues of J(-f) at 200 samples",
        spectral_report(&f.negated(), cfg.spectral_samples, cfg.sample_box, Some(-1.0), cfg).map(|s| {
            (s.within(1e-8), format!("max deviation from -1: {:e}", s.max_deviation.unwrap_or(f64::NAN)))
        }),
    ));
    out
}

/// `x -> f(x) -> f^{-1}(f(x))` exactly, with the inverse from the `m`-th
/// composition power.
fn round_trip(f: &PolyMap, m: u32, seed: u64, count: usize) -> Result<(bool, String)> {
    let fe = f.to_expr_map();
    let mut rng = seeded_rng(seed);
    for _ in 0..count {
        let x = random_rational_point(&mut rng, f.dim(), 20, 7);
        let y = f.evaluate(&x)?;
        let back = invert_by_power_exact(&fe, &y, m)?;
        if back.point.iter().zip(&x).any(|(a, b)| a != &Number::Exact(b.clone())) {
            return Ok((false, format!("f^-1(f(x)) != x at x = {}", show(&x))));
        }
    }
    Ok((true, format!("{count} exact round trips")))
}

fn example4(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let f = fixtures::example4("t").to_poly();
    let g = fixtures::example4_inverse("t").to_poly();
    out.push(check(
        "J(h)^2 != 0 and J(h)^3 = 0",
        f.clone().map(|f| {
            let j = f.perturbation().jacobian();
            let (two, three) = (matrix_power_zero(&j, 2), matrix_power_zero(&j, 3));
            (!two && three, format!("J^2 = 0: {two}, J^3 = 0: {three}"))
        }),
    ));
    out.push(check(
        "closed-form inverse composes to the identity",
        f.clone().and_then(|f| {
            let g = g?;
            let ok = f.compose(&g)? == PolyMap::identity(3) && g.compose(&f)? == PolyMap::identity(3);
            Ok((ok, "f o g and g o f".into()))
        }),
    ));
    out.push(check(
        "no constant composition power within the cap",
        f.clone().and_then(|f| {
            let s = symbolic_power_constancy(&f.perturbation(), 6, 20_000)?;
            let detail = match s {
                PowerSearch::Constant { power, .. } => format!("constant at power {power}"),
                PowerSearch::NotWithin { max_power } => format!("nonconstant up to power {max_power}"),
                PowerSearch::CapReached { power, terms } => format!("nonconstant; cap reached at power {power} ({terms} terms)"),
            };
            Ok((s.constant_power().is_none(), detail))
        }),
    ));
    out.push(check(
        "not strongly nilpotent",
        f.and_then(|f| {
            let s = strongly_nilpotent_generic(&f.perturbation(), cfg.monomial_cap)?;
            Ok((!s.is_strong(), s.to_string()))
        }),
    ));
    out
}

fn example5(cfg: &RunConfig) -> Vec<Check> {
    let h = fixtures::example5_h("t");
    let orbit = fixtures::example5_orbit();
    let mut out = Vec::new();
    out.push(check(
        "origin is fixed",
        h.evaluate(&vec![Rational::from_integer(0.into()); 3]).map(|v| {
            let ok = v.iter().all(|x| x == &Rational::from_integer(0.into()));
            (ok, format!("h(0) = {}", show(&v)))
        }),
    ));
    let start: Vec<f64> = orbit[0].iter().map(|&x| x as f64).collect();
    out.push(check(
        "period-3 orbit detected",
        iterate_map(&h, &start, 30, cfg).map(|o| {
            let cycle_ok = (0..3).all(|k| o.points[k].iter().zip(&orbit[k]).all(|(a, b)| *a == *b as f64));
            (o.period == Some(3) && cycle_ok, o.period.map_or("no period".to_string(), |p| format!("period {p}")))
        }),
    ));
    out.push(check(
        "h composed 3 times fixes the orbit and the origin",
        h.to_poly().and_then(|p| {
            let h3 = p.compose_power(3, cfg.monomial_cap)?;
            let mut pts: Vec<Vec<Rational>> = orbit
                .iter()
                .map(|q| q.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect();
            pts.push(vec![Rational::from_integer(0.into()); 3]);
            for q in &pts {
                if &h3.evaluate(q)? != q {
                    return Ok((false, format!("not fixed: {}", show(q))));
                }
            }
            Ok((true, "4 distinct fixed points".into()))
        }),
    ));
    out
}
