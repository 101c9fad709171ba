use std::path::Path;

use nilmap::config::RunConfig;
use nilmap::dynamics::{integrate_flow, iterate_map, spectral_report, OrbitMode};
use nilmap::expr::parse_rational;
use nilmap::infinity::{
    diffeomorphism_check, direction_numbers, leading_forms, no_zeros_at_infinity, unique_fixed_point_via_randall,
    InfinityVerdict, RandallVerdict, Uniqueness,
};
use nilmap::inversion::{invert_auto, invert_by_power, invert_by_power_exact, newton_fixed_points, planar_inverse};
use nilmap::jacobian::{is_unipotent, is_unipotent_sampled, NilpotenceVerdict};
use nilmap::newclass::{parse_recipe, verify_claims, verify_claims_numeric};
use nilmap::planar::{extract_normal_form, planar_invariant_check};
use nilmap::triangular::{strongly_nilpotent_generic, strongly_nilpotent_sampled, triangularize_map, StrongNilpotence};
use nilmap::{Error, ExprMap, Number, PolyMap, Rational};
use serde_json::{json, Value};

use crate::report::{self, float, floats, numbers, points, rational, rationals, Format, Report};
use crate::{examples, Cli, CliError, Command};

type Outcome = Result<(Report, Option<String>), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<ExprMap, CliError> {
    Ok(nilmap::parse_map(&read(path)?)?)
}

fn load_poly(path: &Path) -> Result<PolyMap, CliError> {
    load_map(path)?
        .to_poly()
        .map_err(|e| CliError::Usage(format!("{}: this command needs a polynomial map ({e})", path.display())))
}

/// `p/q`, integers and plain decimals are exact; anything else `f64` parses
/// is a float.
fn parse_number(text: &str) -> Option<Number> {
    let t = text.trim();
    if let Some(r) = parse_rational(t) {
        return Some(Number::Exact(r));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()) {
            let digits = format!("{int}{frac}");
            let den = format!("1{}", "0".repeat(frac.len()));
            if let Some(r) = parse_rational(&format!("{digits}/{den}")) {
                return Some(Number::Exact(r));
            }
        }
    }
    t.parse::<f64>().ok().filter(|x| x.is_finite()).map(Number::Float)
}

fn parse_point(text: &str) -> Result<Vec<Number>, CliError> {
    text.split(',')
        .map(|s| parse_number(s).ok_or_else(|| CliError::Usage(format!("not a number: {s:?}"))))
        .collect()
}

fn exact_point(p: &[Number]) -> Option<Vec<Rational>> {
    p.iter()
        .map(|x| match x {
            Number::Exact(r) => Some(r.clone()),
            Number::Float(_) => None,
        })
        .collect()
}

fn float_point(p: &[Number]) -> Vec<f64> {
    p.iter().map(Number::to_f64).collect()
}

fn parse_box(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("expected LO,HI with LO < HI, got {text:?}"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn config(cli: &Cli) -> RunConfig {
    RunConfig { seed: cli.seed, ..RunConfig::default() }
}

fn verdict_fields(r: Report, v: &NilpotenceVerdict) -> Report {
    let r = r.field("detail", v.to_string());
    match v {
        NilpotenceVerdict::ProvenNot { witness, lambda_power, value } => r
            .field("witness", numbers(witness))
            .field("lambda_power", *lambda_power)
            .field("value", report::number(value)),
        _ => r,
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let mut cfg = config(cli);
    match &cli.command {
        Command::CheckUnipotent { map, exact, sampled, tol } => {
            let f = load_map(map)?;
            if let Some(n) = sampled {
                cfg.nilpotence_samples = *n;
            }
            if let Some(t) = tol {
                cfg.nilpotence_tol = *t;
            }
            cfg.validate()?;
            let poly = if sampled.is_some() { None } else { f.to_poly().ok() };
            if *exact && poly.is_none() {
                return Err(CliError::Usage("the exact check needs a polynomial map; use --sampled N".into()));
            }
            let (v, r) = match &poly {
                Some(p) => {
                    let v = is_unipotent(p);
                    let r = Report::new("check-unipotent", v.label()).field("method", "exact");
                    (v, r)
                }
                None => {
                    let v = is_unipotent_sampled(&f, &cfg);
                    let r = Report::new("check-unipotent", v.label())
                        .seed(cfg.seed)
                        .field("method", "sampled")
                        .field("samples", cfg.nilpotence_samples)
                        .field("tol", float(cfg.nilpotence_tol));
                    (v, r)
                }
            };
            Ok((verdict_fields(r, &v).negative(v.is_negative()), None))
        }

        Command::CheckStrongNilpotence { map, generic, sampled } => {
            let f = load_map(map)?;
            let poly = if sampled.is_some() { None } else { f.to_poly().ok() };
            if *generic && poly.is_none() {
                return Err(CliError::Usage("the generic check needs a polynomial map; use --sampled N".into()));
            }
            match poly {
                Some(p) => {
                    let v = strongly_nilpotent_generic(&p.perturbation(), cfg.monomial_cap)?;
                    let mut r = Report::new("check-strong-nilpotence", if v.is_strong() { "Strong" } else { "NotStrong" })
                        .negative(!v.is_strong())
                        .field("method", "generic")
                        .field("detail", v.to_string());
                    if let StrongNilpotence::NotStrong { points, entry, value } = &v {
                        let pts: Vec<Value> = points.iter().map(|p| rationals(p)).collect();
                        r = r
                            .field("points", pts)
                            .field("entry", json!([entry.0 + 1, entry.1 + 1]))
                            .field("value", rational(value));
                    }
                    Ok((r, None))
                }
                None => {
                    if let Some(n) = sampled {
                        cfg.strong_tuples = *n;
                    }
                    cfg.validate()?;
                    let v = strongly_nilpotent_sampled(&f.perturbation(), &cfg);
                    let negative = matches!(v, nilmap::triangular::SampledStrongNilpotence::NotStrong { .. });
                    let label = if v.is_probably_strong() {
                        "ProbablyStrong"
                    } else if negative {
                        "NotStrong"
                    } else {
                        "Inconclusive"
                    };
                    let r = Report::new("check-strong-nilpotence", label)
                        .negative(negative)
                        .seed(cfg.seed)
                        .field("method", "sampled")
                        .field("tuples", cfg.strong_tuples)
                        .field("detail", v.to_string());
                    Ok((r, None))
                }
            }
        }

        Command::Triangularize { map } => {
            let f = load_poly(map)?;
            match triangularize_map(&f) {
                Ok((basis, t)) => {
                    let s: Vec<Value> = basis.matrix().to_rows().iter().map(|r| rationals(r)).collect();
                    let r = Report::new("triangularize", "Triangularized")
                        .field("S", s)
                        .body(t.render());
                    Ok((r, None))
                }
                Err(Error::NotStronglyNilpotent { stage }) => {
                    let witness = strongly_nilpotent_generic(&f.perturbation(), cfg.monomial_cap)?;
                    let r = Report::new("triangularize", "NotStronglyNilpotent")
                        .negative(true)
                        .field("stage", stage)
                        .field("witness", witness.to_string());
                    Ok((r, None))
                }
                Err(e) => Err(e.into()),
            }
        }

        Command::BuildNewclass { recipe, perturbation, inverse_samples } => {
            let recipe = parse_recipe(&read(recipe)?)?;
            let map = if *perturbation { recipe.build()? } else { recipe.build_map()? };
            let r = Report::new("build-newclass", "verified")
                .seed(cfg.seed)
                .field("dim", recipe.dim())
                .field("level", recipe.level())
                .field("emitted", if *perturbation { "h" } else { "f = id + h" });
            let r = if recipe.is_polynomial() {
                match verify_claims(&recipe, &cfg, *inverse_samples) {
                    Ok(claims) => {
                        let levels: Vec<Value> = claims
                            .levels
                            .iter()
                            .map(|l| {
                                json!({
                                    "level": l.level,
                                    "principal_nilpotent": l.principal_nilpotent,
                                    "fibered_power_parametric": l.fibered_power_parametric,
                                })
                            })
                            .collect();
                        r.field("verification", "exact")
                            .field("nilpotent", claims.nilpotent)
                            .field("levels", levels)
                            .field("power_value", rationals(&claims.power_value))
                            .field("inverse_checks", claims.inverse_checks)
                    }
                    Err(Error::ClaimFailed { claim, detail }) => {
                        failed_claim(r, claim, &detail)
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                match verify_claims_numeric(&recipe, &cfg) {
                    Ok(claims) => {
                        let ok = claims.power_spread <= cfg.numeric_constancy_tol
                            && claims.inverse_residual <= cfg.numeric_constancy_tol;
                        let r = r
                            .field("verification", "sampled")
                            .field("samples", claims.samples)
                            .field("nilpotence", claims.nilpotence.to_string())
                            .field("power_spread", float(claims.power_spread))
                            .field("inverse_residual", float(claims.inverse_residual));
                        if ok {
                            r
                        } else {
                            failed_claim(r, "sampled constancy", "spread or residual above tolerance")
                        }
                    }
                    Err(Error::ClaimFailed { claim, detail }) => failed_claim(r, claim, &detail),
                    Err(e) => return Err(e.into()),
                }
            };
            Ok((r.body(map.render()), None))
        }

        Command::Invert { map, point, power, .. } => {
            let f = load_map(map)?;
            let y = parse_point(point)?;
            if y.len() != f.dim() {
                return Err(CliError::Usage(format!("point has {} coordinates, map has dimension {}", y.len(), f.dim())));
            }
            let exact = exact_point(&y);
            let result = match (power, &exact) {
                (Some(m), Some(yq)) => match invert_by_power_exact(&f, yq, *m) {
                    Err(Error::InexactRequired(_)) => invert_by_power(&f, &float_point(&y), *m, cfg.inverse_tol)?,
                    other => other?,
                },
                (Some(m), None) => invert_by_power(&f, &float_point(&y), *m, cfg.inverse_tol)?,
                (None, _) => match (f.to_poly(), &exact) {
                    (Ok(p), Some(yq)) => invert_auto(&p, yq, &cfg)?,
                    _ if f.dim() == 2 => planar_inverse(&f, &float_point(&y), cfg.inverse_tol)?,
                    _ => {
                        return Err(CliError::Usage(
                            "automatic inversion needs a polynomial map and an exact target; pass --power m".into(),
                        ))
                    }
                },
            };
            let r = Report::new("invert", "inverted")
                .field("point", numbers(&result.point))
                .field("method", result.method.to_string())
                .field("residual", float(result.residual));
            Ok((r, None))
        }

        Command::FixedPoints { map, starts, bounds } => {
            let f = load_map(map)?;
            cfg.newton_starts = *starts;
            cfg.newton_box = parse_box(bounds)?;
            cfg.validate()?;
            let s = newton_fixed_points(&f, &cfg)?;
            let r = Report::new("fixed-points", format!("{} distinct fixed point(s)", s.points.len()))
                .seed(s.seed)
                .field("points", points(&s.points))
                .field("starts", s.starts)
                .field("converged", s.converged)
                .field("box", floats(&[cfg.newton_box.0, cfg.newton_box.1]));
            Ok((r, None))
        }

        Command::PlanarExtract { map } => {
            let f = load_poly(map)?;
            match extract_normal_form(&f) {
                Ok(nf) => {
                    let r = Report::new("planar-extract", "NormalForm")
                        .field("a", rational(&nf.a))
                        .field("b", rational(&nf.b))
                        .field("c", rational(&nf.c))
                        .field("d", rational(&nf.d))
                        .field("phi", nf.phi.render_with(&|_| "t".to_string()))
                        .field("invariant_holds", planar_invariant_check(&f, &nf));
                    Ok((r, None))
                }
                Err(e @ (Error::NotPlanarNormalizable(_) | Error::Precondition(_))) => {
                    let r = Report::new("planar-extract", "NotNormalizable")
                        .negative(true)
                        .field("certificate", e.to_string());
                    Ok((r, None))
                }
                Err(e) => Err(e.into()),
            }
        }

        Command::InfinityCheck { map } => {
            let f = load_poly(map)?;
            let forms = leading_forms(&f);
            let v = no_zeros_at_infinity(&f, &cfg)?;
            let negative = matches!(v, InfinityVerdict::ProvenZero { .. } | InfinityVerdict::NumericZero { .. });
            let degrees: Vec<Value> = forms.degrees.iter().map(|d| d.map_or(Value::Null, |d| json!(d))).collect();
            let leading: Vec<Value> = forms.leading.iter().map(|p| json!(p.to_string())).collect();
            let label = match &v {
                InfinityVerdict::Vacuous => "Vacuous",
                InfinityVerdict::ProvenNone => "ProvenNone",
                InfinityVerdict::ProvenZero { .. } => "ProvenZero",
                InfinityVerdict::ProbablyNone { .. } => "ProbablyNone",
                InfinityVerdict::NumericZero { .. } => "NumericZero",
                InfinityVerdict::Inconclusive { .. } => "Inconclusive",
            };
            let mut r = Report::new("infinity-check", label)
                .negative(negative)
                .field("degrees", degrees)
                .field("leading_forms", leading)
                .field("detail", v.to_string())
                .field("heuristic", v.is_heuristic());
            if v.is_heuristic() {
                r = r.seed(cfg.seed);
            }
            if let InfinityVerdict::ProvenZero { direction } = &v {
                r = r.field("direction", numbers(&direction_numbers(direction)));
            }
            if f.dim() == 2 && forms.degrees.iter().all(|d| d.is_some_and(|d| d > 0)) {
                let d = diffeomorphism_check(&f)?;
                let randall = match &d.randall {
                    RandallVerdict::ProvenHolds => "holds".to_string(),
                    RandallVerdict::ProvenFails { direction } => format!("fails along {direction}"),
                };
                r = r
                    .field("jacobian_det", d.jacobian_det.to_string())
                    .field("det_sign", d.det_sign.map_or(Value::Null, |s| json!(s)))
                    .field("randall", randall)
                    .field("diffeomorphism_certified", d.certified());
            }
            Ok((r, None))
        }

        Command::UniqueFixedPoint { map } => {
            let f = load_poly(map)?;
            match unique_fixed_point_via_randall(&f, &cfg)? {
                Uniqueness::Certified(c) => {
                    let r = Report::new("unique-fixed-point", "Certified")
                        .seed(c.search.seed)
                        .field("basis", format!("{:?}", c.basis))
                        .field("det_j_minus_i", c.det_j_minus_i.as_ref().map_or(Value::Null, rational))
                        .field("exact_point", c.exact_point.as_deref().map_or(Value::Null, rationals))
                        .field("newton_points", points(&c.search.points))
                        .field("newton_starts", c.search.starts)
                        .field("newton_converged", c.search.converged);
                    Ok((r, None))
                }
                Uniqueness::NotApplicable { hypothesis, detail } => {
                    let search = newton_fixed_points(&ExprMap::from(&f), &cfg)?;
                    let r = Report::new("unique-fixed-point", "NotApplicable")
                        .negative(true)
                        .seed(search.seed)
                        .field("hypothesis", hypothesis.to_string())
                        .field("detail", detail)
                        .field("newton_points", points(&search.points))
                        .field("newton_starts", search.starts)
                        .field("newton_converged", search.converged);
                    Ok((r, None))
                }
            }
        }

        Command::Orbit { map, flow, start, t0, t1, steps, .. } => {
            let f = load_map(map)?;
            let p0: Vec<f64> = float_point(&parse_point(start)?);
            let orbit = if *flow {
                integrate_flow(&f.negated(), &p0, *t0, *t1, *steps, &cfg)?
            } else {
                iterate_map(&f, &p0, *steps, &cfg)?
            };
            let mode = match orbit.mode {
                OrbitMode::Continuous { .. } => "flow",
                OrbitMode::Discrete => "iterate",
            };
            let verdict = if orbit.diverged {
                "diverged".to_string()
            } else if let Some(p) = orbit.period {
                format!("period {p}")
            } else {
                "completed".to_string()
            };
            let note = format!(
                "orbit ({mode}): {} points, {verdict}, final norm {:e}\n",
                orbit.len(),
                orbit.norms.last().copied().unwrap_or(0.0)
            );
            let mut r = Report::new("orbit", verdict)
                .field("mode", mode)
                .field("points", orbit.len())
                .field("diverged", orbit.diverged)
                .field("period", orbit.period.map_or(Value::Null, |p| json!(p)))
                .body(orbit.to_csv());
            r.body_only = true;
            let note = (cli.format != Format::Json).then_some(note);
            Ok((r, note))
        }

        Command::Spectral { map, samples, bounds, target } => {
            let f = load_map(map)?;
            let b = parse_box(bounds)?;
            let s = spectral_report(&f, *samples, b, *target, &cfg)?;
            let r = Report::new("spectral", format!("{} samples", s.samples))
                .seed(s.seed)
                .field("samples", s.samples)
                .field("skipped", s.skipped)
                .field("min_real_part", float(s.min_real_part))
                .field("max_modulus", float(s.max_modulus))
                .field("target", s.target.map_or(Value::Null, float))
                .field("max_deviation", s.max_deviation.map_or(Value::Null, float))
                .field("box", floats(&[b.0, b.1]));
            Ok((r, None))
        }

        Command::VerifyExample { example } => {
            let checks = examples::verify(*example, &cfg);
            let failed = checks.iter().filter(|c| !c.passed).count();
            let list: Vec<Value> = checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            let lines: String = checks
                .iter()
                .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
                .collect();
            let verdict = if failed == 0 {
                format!("example {example}: all {} checks pass", checks.len())
            } else {
                format!("example {example}: {failed} of {} checks fail", checks.len())
            };
            let r = Report::new("verify-example", verdict)
                .negative(failed > 0)
                .seed(cfg.seed)
                .field("example", *example)
                .field("checks", list);
            let r = if cli.format == Format::Json { r } else { Report { fields: Vec::new(), ..r }.body(lines) };
            Ok((r, None))
        }
    }
}

fn failed_claim(r: Report, claim: &str, detail: &str) -> Report {
    Report { verdict: "ClaimFailed".into(), ..r }
        .negative(true)
        .field("failed_claim", claim)
        .field("detail", detail)
}
