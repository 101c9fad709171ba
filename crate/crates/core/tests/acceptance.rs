//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Run with `cargo test -p nilmap --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nilmap::config::RunConfig;
use nilmap::dynamics::{detect_period, integrate_flow, iterate_map, spectral_report, verify_analytic_orbit};
use nilmap::expr::{make_cubic_linear, rat, ratio};
use nilmap::fixtures;
use nilmap::infinity::{
    diffeomorphism_check, no_zeros_at_infinity, sturm_count, unique_fixed_point_via_randall, Endpoint,
    InfinityVerdict, UniPoly, Uniqueness,
};
use nilmap::inversion::{
    invert_auto, invert_by_power_exact, planar_inverse_symbolic, symbolic_power_constancy, InversionMethod,
};
use nilmap::jacobian::{is_nilpotent_exact, is_unipotent, is_unipotent_sampled, matrix_power_zero, NilpotenceVerdict};
use nilmap::newclass::{random_recipe, verify_claims};
use nilmap::numeric::{distance, max_abs_diff, norm, random_rational_point, seeded_rng, uniform_point};
use nilmap::planar::{extract_normal_form, make_planar, planar_invariant_check, random_normal_form};
use nilmap::triangular::{
    random_conjugated_family, strongly_nilpotent_generic, triangularize_family, triangularize_map, MatrixFamily,
    StrongNilpotence,
};
use nilmap::{Error, ExprMap, Matrix, Monomial, Number, Poly, PolyMap, Rational};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: Error) -> String {
    err.to_string()
}

fn exact(v: &[Number]) -> Vec<Rational> {
    v.iter()
        .map(|x| match x {
            Number::Exact(r) => r.clone(),
            Number::Float(f) => panic!("expected an exact result, got {f}"),
        })
        .collect()
}

fn ac1(cfg: &RunConfig) -> Outcome {
    let f = fixtures::example1();
    let g = fixtures::example1_inverse();
    let mut rng = seeded_rng(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = uniform_point(&mut rng, 2, -10.0, 10.0);
        worst = worst.max(max_abs_diff(&f.evaluate(&g.evaluate(&x).map_err(e)?).map_err(e)?, &x));
        worst = worst.max(max_abs_diff(&g.evaluate(&f.evaluate(&x).map_err(e)?).map_err(e)?, &x));
    }
    ensure(worst < 1e-9, || format!("round trip error {worst:e}"))?;
    let v = is_unipotent_sampled(&f, cfg);
    let ok = matches!(v, NilpotenceVerdict::ProbablyNilpotent { samples: 500, tol } if tol == 1e-9);
    ensure(ok, || format!("sampled verdict {v}"))?;
    Ok(format!("round trip error {worst:.1e}; {v}"))
}

fn ac2(_cfg: &RunConfig) -> Outcome {
    let cases = fixtures::example2_fixtures();
    for (k, fx) in cases.iter().enumerate() {
        let map = fx.map();
        let f = map.to_poly().map_err(e)?;
        let h = f.perturbation();
        ensure(h.degree().unwrap_or(0) <= 3, || format!("fixture {k}: degree {:?}", h.degree()))?;
        let v = is_nilpotent_exact(&h);
        ensure(v.is_proven(), || format!("fixture {k}: {v}"))?;
        let s = strongly_nilpotent_generic(&h, 2_000_000).map_err(e)?;
        ensure(s.is_strong(), || format!("fixture {k}: {s}"))?;
        let (basis, _) = triangularize_map(&f).map_err(e)?;
        ensure(basis.matrix() == &Matrix::identity(4), || format!("fixture {k}: S = {:?}", basis.matrix()))?;
        let g = fx.inverse();
        let mut rng = seeded_rng(1000 + k as u64);
        for _ in 0..50 {
            let y = random_rational_point(&mut rng, 4, 20, 7);
            let got = invert_by_power_exact(&map, &y, 4).map_err(e)?;
            let want = g.evaluate(&y).map_err(e)?;
            ensure(exact(&got.point) == want, || format!("fixture {k}: mismatch at {y:?}"))?;
        }
    }
    Ok(format!("{} fixtures, 50 exact inverse matches each", cases.len()))
}

fn ac3(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let fe = fixtures::example3("-t^2");
    let f = fe.to_poly().map_err(e)?;
    let v = is_unipotent(&f);
    ensure(v.is_proven(), || format!("is_unipotent: {v}"))?;

    let h3 = f.perturbation().compose_power(3, cfg.monomial_cap).map_err(e)?;
    ensure(h3.constant_value() == Some(vec![rat(0); 3]), || format!("h^3 = {}", h3.render()))?;

    let mut rng = seeded_rng(cfg.seed);
    for _ in 0..50 {
        let x = random_rational_point(&mut rng, 3, 20, 7);
        let y = f.evaluate(&x).map_err(e)?;
        let back = invert_auto(&f, &y, cfg).map_err(e)?;
        ensure(matches!(back.method, InversionMethod::SymbolicPower(_)), || format!("method {}", back.method))?;
        ensure(exact(&back.point) == x, || format!("round trip failed at {x:?}"))?;
    }

    let residual = verify_analytic_orbit(
        &fe,
        &|t| fixtures::example3_orbit(t).to_vec(),
        &|t| fixtures::example3_orbit_derivative(t).to_vec(),
        &[0.0, 0.5, 1.0],
    )
    .map_err(e)?;
    ensure(residual < 1e-9, || format!("orbit residual {residual:e}"))?;

    let orbit = integrate_flow(&fe.negated(), &[18.0, -12.0, 1.0], 0.0, 1.0, 20000, cfg).map_err(e)?;
    let t1 = [18.0 * 1f64.exp(), -12.0 * 2f64.exp(), (-1f64).exp()];
    let rel = distance(orbit.last(), &t1) / norm(&t1);
    ensure(rel < 1e-6, || format!("RK4 relative error {rel:e}"))?;

    let spec = spectral_report(&fe.negated(), 200, (-10.0, 10.0), Some(-1.0), cfg).map_err(e)?;
    ensure(spec.samples == 200 && spec.skipped == 0, || format!("{} samples, {} skipped", spec.samples, spec.skipped))?;
    ensure(spec.within(1e-8), || format!("eigenvalue deviation {:?}", spec.max_deviation))?;

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "residual {residual:.1e}, RK4 rel. error {rel:.1e}, eigenvalue deviation {:.1e}",
        spec.max_deviation.unwrap_or(f64::NAN)
    ))
}

fn ac4(cfg: &RunConfig) -> Outcome {
    let f = fixtures::example4("t").to_poly().map_err(e)?;
    let g = fixtures::example4_inverse("t").to_poly().map_err(e)?;
    let h = f.perturbation();
    let j = h.jacobian();
    ensure(!matrix_power_zero(&j, 2), || "J(h)^2 = 0".into())?;
    ensure(matrix_power_zero(&j, 3), || "J(h)^3 != 0".into())?;
    let id = PolyMap::identity(3);
    ensure(f.compose(&g).map_err(e)? == id && g.compose(&f).map_err(e)? == id, || "inverse does not compose to id".into())?;

    let search = symbolic_power_constancy(&h, 6, 20_000).map_err(e)?;
    ensure(search.constant_power().is_none(), || format!("{search:?}"))?;

    match strongly_nilpotent_generic(&h, cfg.monomial_cap).map_err(e)? {
        StrongNilpotence::NotStrong { points, entry, value } => {
            let mut prod = Matrix::<Rational>::identity(3);
            for p in &points {
                prod = prod.mul(&j.try_map(|q| q.eval(p)).map_err(e)?);
            }
            ensure(prod.get(entry.0, entry.1) == &value && !value.is_zero(), || "witness does not check".into())?;
            Ok(format!("{search:?}; witness entry {entry:?} = {value}"))
        }
        other => Err(format!("expected NotStrong, got {other}")),
    }
}

fn ac5(cfg: &RunConfig) -> Outcome {
    let h = fixtures::example5_h("t");
    let origin = vec![rat(0); 3];
    ensure(h.evaluate(&origin).map_err(e)? == origin, || "origin is not fixed".into())?;
    let cycle = fixtures::example5_orbit();
    let start: Vec<f64> = cycle[0].iter().map(|&x| x as f64).collect();
    let orbit = iterate_map(&h, &start, 12, cfg).map_err(e)?;
    ensure(detect_period(&orbit, 1e-8) == Some(3), || format!("period {:?}", orbit.period))?;
    for (k, q) in cycle.iter().enumerate() {
        let want: Vec<f64> = q.iter().map(|&x| x as f64).collect();
        ensure(orbit.points[k] == want, || format!("step {k}: {:?}", orbit.points[k]))?;
    }
    let h3 = h.to_poly().map_err(e)?.compose_power(3, cfg.monomial_cap).map_err(e)?;
    let mut fixed: Vec<Vec<Rational>> = cycle.iter().map(|q| q.iter().map(|&x| rat(x)).collect()).collect();
    fixed.push(origin);
    for q in &fixed {
        ensure(&h3.evaluate(q).map_err(e)? == q, || format!("{q:?} not fixed by h^3"))?;
    }
    fixed.dedup();
    ensure(fixed.len() == 4, || "points are not distinct".into())?;
    Ok("period 3 detected; 4 distinct fixed points of h^3".into())
}

fn ac6(cfg: &RunConfig) -> Outcome {
    let mut rng = seeded_rng(cfg.seed);
    let id = PolyMap::identity(2);
    for k in 0..20 {
        let case = random_normal_form(&mut rng, 5, 4);
        let f = make_planar(&case).map_err(e)?.to_poly().map_err(e)?;
        let got = extract_normal_form(&f).map_err(e)?;
        ensure(make_planar(&got).map_err(e)?.to_poly().map_err(e)? == f, || format!("case {k}: rebuild differs"))?;
        // The offsets only shift h by the constant (c, d).
        let h = f.perturbation();
        let live = h.sub(&PolyMap::constant(&[case.c.clone(), case.d.clone()]));
        let combo = &live.components()[0].scale(&case.a) + &live.components()[1].scale(&case.b);
        ensure(combo.is_zero(), || format!("case {k}: a h1 + b h2 = {combo}"))?;
        ensure(planar_invariant_check(&f, &got), || format!("case {k}: invariant fails for the extracted form"))?;
        let [p, q] = planar_inverse_symbolic(&f).map_err(e)?;
        ensure(p == q, || format!("case {k}: formulas disagree"))?;
        ensure(f.compose(&p).map_err(e)? == id, || format!("case {k}: not an inverse"))?;
    }
    Ok("20 normal forms".into())
}

fn ac7(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(cfg.seed);
    let mut capped = Vec::new();
    let mut levels = 0;
    for k in 0..20 {
        let n = 1 + k % 4;
        let recipe = random_recipe(&mut rng, n, 2, 4);
        match verify_claims(&recipe, cfg, 20) {
            Ok(report) => {
                ensure(report.nilpotent && report.levels.len() == n, || format!("recipe {k}: {report:?}"))?;
                ensure(report.levels.iter().all(|l| l.principal_nilpotent), || format!("recipe {k}: level lemma"))?;
                levels += report.levels.len();
            }
            Err(Error::ResourceCap { what, count, cap }) => capped.push(format!("recipe {k}: {what} {count} > {cap}")),
            Err(err) => return Err(format!("recipe {k} (n = {n}): {err}\n{}", recipe.render())),
        }
    }
    let elapsed = start.elapsed();
    if !capped.is_empty() {
        return Ok(format!("resource cap reached: {}", capped.join("; ")));
    }
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("20 recipes, {levels} levels verified"))
}

fn products_vanish(family: &MatrixFamily, len: usize) -> bool {
    let mut layer = vec![Matrix::<Rational>::identity(family.dim())];
    for _ in 0..len {
        layer = layer.iter().flat_map(|p| family.generators().iter().map(move |g| p.mul(g))).collect();
    }
    layer.iter().all(Matrix::is_zero)
}

fn ac8(cfg: &RunConfig) -> Outcome {
    let mut rng = seeded_rng(cfg.seed);
    for k in 0..20 {
        let n = rng.gen_range(2..=5);
        let count = rng.gen_range(1..=4);
        let (family, _) = random_conjugated_family(&mut rng, n, count);
        let basis = triangularize_family(&family).map_err(|err| format!("family {k}: {err}"))?;
        ensure(basis.verify(&family), || format!("family {k}: basis does not triangularize"))?;
        let s = basis.matrix();
        ensure(&s.mul(basis.inverse()) == &Matrix::identity(n), || format!("family {k}: bad inverse"))?;
        for g in family.generators() {
            let c = basis.inverse().mul(g).mul(s);
            ensure(c.is_strictly_upper(), || format!("family {k}: conjugate not strictly upper"))?;
        }
        ensure(products_vanish(&family, n), || format!("family {k}: a length-{n} product is nonzero"))?;
    }
    let bad = MatrixFamily::new(
        3,
        vec![
            Matrix::from_i64_rows(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]),
            Matrix::from_i64_rows(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]),
        ],
    )
    .map_err(e)?;
    match triangularize_family(&bad) {
        Err(Error::NotStronglyNilpotent { stage }) => Ok(format!("20 families recovered; bad family rejected at stage {stage}")),
        other => Err(format!("non-nilpotent family accepted: {other:?}")),
    }
}

fn ac9(cfg: &RunConfig) -> Outcome {
    let f = fixtures::randall_example();
    let v = no_zeros_at_infinity(&f, cfg).map_err(e)?;
    ensure(v == InfinityVerdict::ProvenNone, || format!("Randall map: {v:?}"))?;
    let report = diffeomorphism_check(&f).map_err(e)?;
    let det = &Poly::constant(rat(1)) + &Poly::from_terms(vec![(Monomial::from_exponents(vec![2, 2]), rat(9))]);
    ensure(report.jacobian_det == det, || format!("det J = {}", report.jacobian_det))?;

    let a = Matrix::from_i64_rows(&[&[1, 1], &[-1, -1]]);
    let cubic = make_cubic_linear(&a);
    let det_c = cubic.jacobian().det();
    ensure(det_c == Poly::constant(rat(1)), || format!("cubic-linear det J = {det_c}"))?;
    let vc = no_zeros_at_infinity(&cubic, cfg).map_err(e)?;
    ensure(matches!(vc, InfinityVerdict::ProvenZero { .. }), || format!("cubic-linear: {vc:?}"))?;

    let cfg = RunConfig { newton_starts: 100, newton_separation: 1e-6, ..cfg.clone() };
    match unique_fixed_point_via_randall(&fixtures::unique_fixed_point_example(), &cfg).map_err(e)? {
        Uniqueness::Certified(cert) => {
            ensure(cert.search.points.len() == 1, || format!("{} Newton points", cert.search.points.len()))?;
            ensure(cert.exact_point == Some(vec![ratio(3, 2), ratio(1, 2)]), || format!("{:?}", cert.exact_point))?;
            Ok(format!("det J = {det}; cubic-linear zero found; one fixed point from {} starts", cfg.newton_starts))
        }
        Uniqueness::NotApplicable { hypothesis, detail } => Err(format!("not certified: {hypothesis}: {detail}")),
    }
}

/// Every map used as a fixture, with a sampling box where it is well scaled.
fn all_fixtures() -> Vec<(String, ExprMap)> {
    let mut out = vec![
        ("example 1".to_string(), fixtures::example1()),
        ("example 1 inverse".to_string(), fixtures::example1_inverse()),
        ("example 3".to_string(), fixtures::example3("-t^2")),
        ("example 3 inverse".to_string(), fixtures::example3_inverse("-t^2")),
        ("example 4".to_string(), fixtures::example4("t")),
        ("example 4 inverse".to_string(), fixtures::example4_inverse("t")),
        ("example 5 h".to_string(), fixtures::example5_h("t")),
        ("randall".to_string(), fixtures::randall_example().to_expr_map()),
        ("unique fixed point".to_string(), fixtures::unique_fixed_point_example().to_expr_map()),
        ("bounded".to_string(), fixtures::bounded_example()),
    ];
    for (k, fx) in fixtures::example2_fixtures().iter().enumerate() {
        out.push((format!("example 2 fixture {k}"), fx.map()));
        out.push((format!("example 2 fixture {k} inverse"), fx.inverse()));
    }
    out
}

fn rk4_error(steps: usize, cfg: &RunConfig) -> Result<f64, String> {
    let o = integrate_flow(&fixtures::example3("-t^2").negated(), &[18.0, -12.0, 1.0], 0.0, 1.0, steps, cfg).map_err(e)?;
    Ok(distance(o.last(), &fixtures::example3_orbit(1.0)))
}

/// Roots of a square-free `p`: sign changes on a fine grid inside the
/// Cauchy bound, then bisection.
fn bisection_root_count(p: &UniPoly) -> usize {
    let b = p.root_bound().to_f64().unwrap_or(f64::MAX);
    let steps = 200_000;
    let h = 2.0 * b / steps as f64;
    let mut count = 0;
    let mut prev = p.eval_f64(-b);
    for k in 1..=steps {
        let v = p.eval_f64(-b + k as f64 * h);
        if v == 0.0 || (prev != 0.0 && v.signum() != prev.signum()) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// Central differences at steps `h` and `h/2` combined to cancel the `h^2`
/// error term, which keeps the large-coefficient fixtures within tolerance.
fn richardson(f: &ExprMap, x: &[f64], v: usize) -> Result<Vec<f64>, String> {
    let central = |step: f64| -> Result<Vec<f64>, String> {
        let (mut up, mut down) = (x.to_vec(), x.to_vec());
        up[v] += step;
        down[v] -= step;
        let (fu, fd) = (f.evaluate(&up).map_err(e)?, f.evaluate(&down).map_err(e)?);
        Ok(fu.iter().zip(&fd).map(|(a, b)| (a - b) / (2.0 * step)).collect())
    };
    let (coarse, fine) = (central(1e-3)?, central(5e-4)?);
    Ok(fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect())
}

fn ac10(cfg: &RunConfig) -> Outcome {
    let mut rng = seeded_rng(cfg.seed);
    let fx = all_fixtures();
    let mut worst: f64 = 0.0;
    for (name, f) in &fx {
        for _ in 0..20 {
            let x = uniform_point(&mut rng, f.dim(), -2.0, 2.0);
            let j = f.jacobian_at(&x).map_err(e)?;
            for v in 0..f.dim() {
                let fdiff = richardson(f, &x, v)?;
                for i in 0..f.dim() {
                    let d = *j.get(i, v);
                    let rel = (d - fdiff[i]).abs() / d.abs().max(1.0);
                    ensure(rel < 1e-6, || format!("{name}: d{}/dx{} {d} vs {}", i + 1, v + 1, fdiff[i]))?;
                    worst = worst.max(rel);
                }
            }
        }
    }

    let errors = [10, 20, 40, 80].iter().map(|&s| rk4_error(s, cfg)).collect::<Result<Vec<_>, _>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(orders.iter().all(|&o| o > 3.5), || format!("RK4 observed orders {orders:?}"))?;

    let mut checked = 0;
    while checked < 50 {
        let deg = rng.gen_range(1..=6);
        let mut coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-10..=10)).collect();
        if coeffs[deg] == 0 {
            coeffs[deg] = 1;
        }
        let p = UniPoly::from_i64(&coeffs);
        if p.gcd(&p.derivative()).degree() != Some(0) {
            continue;
        }
        let got = sturm_count(&p, &Endpoint::NegInf, &Endpoint::PosInf).map_err(e)?;
        let want = bisection_root_count(&p);
        ensure(got == want, || format!("{coeffs:?}: Sturm {got}, bisection {want}"))?;
        checked += 1;
    }

    let mut nilpotent = 0;
    for (name, f) in &fx {
        let Ok(f) = f.to_poly() else { continue };
        for (label, m) in [("J(f - id)", f.perturbation()), ("J(f)", f.clone())] {
            if is_nilpotent_exact(&m).is_proven() {
                let j = m.jacobian();
                let coeffs = j.char_poly_coeffs();
                ensure(coeffs.iter().all(Poly::is_zero), || format!("{name}: {label} char poly"))?;
                ensure(matrix_power_zero(&j, f.dim() as u32), || format!("{name}: {label}^n != 0"))?;
                nilpotent += 1;
            }
        }
    }
    ensure(nilpotent >= 8, || format!("only {nilpotent} nilpotent fixtures"))?;

    Ok(format!(
        "{} fixtures, worst derivative rel. error {worst:.1e}; RK4 orders {:.2?}; 50 Sturm counts; {nilpotent} Cayley-Hamilton checks",
        fx.len(),
        orders
    ))
}

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let criteria: [(&str, fn(&RunConfig) -> Outcome); 10] = [
        ("example 1 inverse and sampled unipotence", ac1),
        ("example 2 triangular fixtures", ac2),
        ("example 3 escaping orbit", ac3),
        ("example 4 non-strongly-nilpotent map", ac4),
        ("example 5 periodic orbit", ac5),
        ("planar normal forms and inverse formulas", ac6),
        ("random New Class recipes", ac7),
        ("triangularization of conjugated families", ac8),
        ("zeros at infinity and unique fixed point", ac9),
        ("property suites", ac10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(|| check(&cfg)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS AC{} {name} ({secs:.2} s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL AC{} {name} ({secs:.2} s): {detail}", k + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
