use proptest::prelude::*;

use super::*;
use crate::expr::{make_cubic_linear, parse_map, rat};
use crate::fixtures;

fn poly_map(text: &str) -> PolyMap {
    parse_map(text).unwrap().to_poly().unwrap()
}

#[test]
fn leading_form_examples() {
    let forms = leading_forms(&fixtures::randall_example());
    assert_eq!(forms.degree, Some(3));
    assert_eq!(forms.leading, poly_map("dim 2; f1 = x2^3; f2 = -x1^3;").into_components());

    let affine = poly_map("dim 2; f1 = 2*x1 - x2 + 5; f2 = x1 + 1;");
    let forms = leading_forms(&affine);
    assert_eq!(forms.degree, Some(1));
    assert_eq!(forms.leading, poly_map("dim 2; f1 = 2*x1 - x2; f2 = x1;").into_components());

    // x + z phi(x + zy) with phi = -t^2 tops out at -y^2 z^3 in degree 5.
    let ex3 = fixtures::example3("-t^2").to_poly().unwrap();
    let forms = leading_forms(&ex3);
    assert_eq!(forms.degrees, vec![Some(5), Some(4), Some(1)]);
    assert_eq!(forms.leading[0], poly_map("dim 3; f1 = -x2^2*x3^3; f2 = 0; f3 = 0;").components()[0]);
    assert_eq!(forms.leading[1], poly_map("dim 3; f1 = x2^2*x3^2; f2 = 0; f3 = 0;").components()[0]);
    assert!(forms.top[2].is_zero());

    let zero = PolyMap::zero(2);
    assert_eq!(leading_forms(&zero).degrees, vec![None, None]);
}

#[test]
fn leading_forms_are_homogeneous() {
    let maps = [
        fixtures::randall_example(),
        fixtures::example3("-t^2").to_poly().unwrap(),
        fixtures::example4("t").to_poly().unwrap(),
    ];
    for f in maps {
        let n = f.dim();
        let lambda = Poly::var(n);
        let scaled: Vec<Poly> = (0..n).map(|i| &lambda * &Poly::var(i)).collect();
        let forms = leading_forms(&f);
        for (l, d) in forms.leading.iter().zip(&forms.degrees) {
            let d = d.unwrap();
            assert_eq!(l.substitute(&scaled), &lambda.pow(d) * l);
        }
    }
}

#[test]
fn randall_examples() {
    assert!(randall_condition_n2(&fixtures::randall_example()).unwrap().holds());
    let fails = randall_condition_n2(&poly_map("dim 2; f1 = x1*x2; f2 = x1^2;")).unwrap();
    assert_eq!(
        fails,
        RandallVerdict::ProvenFails { direction: ZeroDirection::Exact(vec![rat(0), rat(1)]) }
    );
    assert!(randall_condition_n2(&poly_map("dim 2; f1 = x1^2; f2 = x2^2;")).unwrap().holds());
    // Irrational common direction x = sqrt(2) y.
    let irr = randall_condition_n2(&poly_map("dim 2; f1 = x1^2 - 2*x2^2; f2 = x1^3 - 2*x1*x2^2;")).unwrap();
    match irr {
        RandallVerdict::ProvenFails { direction } => {
            let v = direction.approx();
            assert!((v[0].abs() - 2f64.sqrt()).abs() < 1e-9, "{v:?}");
        }
        other => panic!("{other:?}"),
    }
    // A zero component leaves the other form in charge.
    assert!(randall_condition_n2(&poly_map("dim 2; f1 = x1^2 + x2^2; f2 = 0;")).unwrap().holds());
    assert!(!randall_condition_n2(&poly_map("dim 2; f1 = x1*x2; f2 = 0;")).unwrap().holds());
    assert!(randall_condition_n2(&poly_map("dim 2; f1 = 1; f2 = x1;")).is_err());
}

#[test]
fn zeros_at_infinity() {
    let cfg = RunConfig::default();
    assert_eq!(no_zeros_at_infinity(&fixtures::randall_example(), &cfg).unwrap(), InfinityVerdict::ProvenNone);
    let a = Matrix::from_i64_rows(&[&[1, 1], &[-1, -1]]);
    let cubic = make_cubic_linear(&a);
    assert_eq!(cubic.jacobian().det(), Poly::one());
    assert!(matches!(no_zeros_at_infinity(&cubic, &cfg).unwrap(), InfinityVerdict::ProvenZero { .. }));
    let c = PolyMap::constant(&[rat(1), rat(2)]);
    assert_eq!(no_zeros_at_infinity(&c, &cfg).unwrap(), InfinityVerdict::Vacuous);

    // Three variables: numeric search both ways.
    let a3 = Matrix::from_i64_rows(&[&[1, 1, 0], &[-1, -1, 0], &[0, 0, 0]]);
    assert!(matches!(
        no_zeros_at_infinity(&make_cubic_linear(&a3), &cfg).unwrap(),
        InfinityVerdict::NumericZero { .. }
    ));
    let sq = poly_map("dim 3; f1 = x1^2 + x2*x3; f2 = x2^2; f3 = x3^2 + x1*x2;");
    assert!(matches!(no_zeros_at_infinity(&sq, &cfg).unwrap(), InfinityVerdict::ProbablyNone { .. }));
}

#[test]
fn randall_example_is_a_diffeomorphism() {
    let f = fixtures::randall_example();
    let report = diffeomorphism_check(&f).unwrap();
    assert_eq!(report.jacobian_det, poly_map("dim 2; f1 = 1 + 9*x1^2*x2^2; f2 = 0;").components()[0]);
    assert_eq!(report.det_sign, Some(1));
    assert!(report.certified());
}

#[test]
fn uniqueness_hypotheses() {
    let cfg = RunConfig::default();
    match unique_fixed_point_via_randall(&fixtures::randall_example(), &cfg).unwrap() {
        Uniqueness::NotApplicable { hypothesis, .. } => assert_eq!(hypothesis, Hypothesis::NoEigenvalueOne),
        other => panic!("{other:?}"),
    }
    let c = PolyMap::constant(&[rat(4), rat(-1)]);
    match unique_fixed_point_via_randall(&c, &cfg).unwrap() {
        Uniqueness::Certified(cert) => {
            assert_eq!(cert.basis, CertificateBasis::ConstantMap);
            assert_eq!(cert.exact_point, Some(vec![rat(4), rat(-1)]));
            assert_eq!(cert.search.points.len(), 1);
        }
        other => panic!("{other:?}"),
    }
    match unique_fixed_point_via_randall(&fixtures::unique_fixed_point_example(), &cfg).unwrap() {
        Uniqueness::Certified(cert) => {
            assert_eq!(cert.basis, CertificateBasis::AffineMap);
            assert_eq!(cert.exact_point, Some(vec![crate::expr::ratio(3, 2), crate::expr::ratio(1, 2)]));
            assert_eq!(cert.search.points.len(), 1);
            assert!(cert.search.converged > 0);
        }
        other => panic!("{other:?}"),
    }
    // Nilpotent Jacobian, but degree 2 with a zero at infinity.
    let planar = poly_map("dim 2; f1 = x1 + (x1 + x2)^2; f2 = x2 - (x1 + x2)^2;").perturbation();
    assert!(matches!(
        unique_fixed_point_via_randall(&planar, &cfg).unwrap(),
        Uniqueness::NotApplicable { hypothesis: Hypothesis::ControlAtInfinity, .. }
    ));
}

#[test]
fn bounded_image_reports() {
    let cfg = RunConfig { newton_starts: 30, ..RunConfig::default() };
    let report = bounded_image_fixed_points(&fixtures::bounded_example(), &cfg).unwrap();
    assert!(!report.points.is_empty());
    let c = parse_map("dim 2; f1 = 3; f2 = -2;").unwrap();
    let report = bounded_image_fixed_points(&c, &cfg).unwrap();
    assert_eq!(report.points.len(), 1);
    assert_eq!(report.nilpotence_gap, vec![0.0]);
    let degenerate = parse_map("dim 2; f1 = 1 + sin(x1 + x2) - sin(x1 + x2); f2 = 1/2;").unwrap();
    assert_eq!(bounded_image_fixed_points(&degenerate, &cfg).unwrap().points.len(), 1);
}

/// Real roots of a square-free `p` located by sign changes on a fine grid
/// and refined by bisection to width 1e-9.
fn bisection_roots(p: &UniPoly) -> Vec<f64> {
    let b = p.root_bound().to_f64().unwrap();
    let steps = 400_000;
    let h = 2.0 * b / steps as f64;
    let mut roots = Vec::new();
    let mut x0 = -b;
    let mut v0 = p.eval_f64(x0);
    for k in 1..=steps {
        let x1 = -b + k as f64 * h;
        let v1 = p.eval_f64(x1);
        if v1 == 0.0 {
            roots.push(x1);
        } else if v0 != 0.0 && v0.signum() != v1.signum() {
            let (mut lo, mut hi, mut vlo) = (x0, x1, v0);
            while hi - lo > 1e-9 {
                let mid = 0.5 * (lo + hi);
                let vm = p.eval_f64(mid);
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if vm.signum() == vlo.signum() {
                    lo = mid;
                    vlo = vm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        v0 = v1;
    }
    roots
}

#[test]
fn sturm_matches_bisection_on_random_integer_polys() {
    use rand::Rng;
    let mut rng = seeded_rng(42);
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
        let oracle = bisection_roots(&p);
        let got = sturm_count(&p, &Endpoint::NegInf, &Endpoint::PosInf).unwrap();
        assert_eq!(got, oracle.len(), "{p}: {oracle:?}");
        let isolated = real_roots(&p, &Rational::new(1.into(), (1u64 << 32).into())).unwrap();
        for (r, want) in isolated.iter().zip(&oracle) {
            assert!((r.approx() - want).abs() < 1e-6, "{p}: {r:?} vs {want}");
        }
        checked += 1;
    }
}

fn mul(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let mut c = vec![Rational::zero(); a.coeffs().len() + b.coeffs().len() - 1];
    for (i, x) in a.coeffs().iter().enumerate() {
        for (j, y) in b.coeffs().iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    UniPoly::new(c)
}

/// Smallest `max |L_i|` over 10^4 unit directions.
fn projective_min(forms: &[Poly]) -> f64 {
    (0..10_000)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / 10_000.0;
            let p = [t.cos(), t.sin()];
            forms.iter().map(|l| l.eval(&p).unwrap().abs()).fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn randall_agrees_with_projective_sampling() {
    let cases = [
        "dim 2; f1 = x1 + x2^3; f2 = x2 - x1^3;",
        "dim 2; f1 = x1*x2; f2 = x1^2;",
        "dim 2; f1 = x1^2; f2 = x2^2;",
        "dim 2; f1 = x1^2 - 2*x2^2; f2 = x1^3 - 2*x1*x2^2;",
        "dim 2; f1 = (x1 + x2)^3 + x1; f2 = -(x1 + x2)^3;",
        "dim 2; f1 = x1^2 + x2^2; f2 = x1*x2 + 3;",
    ];
    for text in cases {
        let f = poly_map(text);
        let forms = leading_forms(&f).leading;
        let sampled = projective_min(&forms);
        match randall_condition_n2(&f).unwrap() {
            RandallVerdict::ProvenHolds => assert!(sampled > 1e-3, "{text}: {sampled}"),
            RandallVerdict::ProvenFails { .. } => assert!(sampled < 1e-3, "{text}: {sampled}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sturm_counts_roots_of_products(roots in proptest::collection::vec(-20i64..=20, 0..6), extra in 0u32..2) {
        let mut p = UniPoly::from_i64(&[1]);
        for r in &roots {
            p = mul(&p, &UniPoly::from_i64(&[-r, 1]));
        }
        for _ in 0..extra {
            p = mul(&p, &UniPoly::from_i64(&[1, 0, 1]));
        }
        let mut distinct = roots.clone();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(sturm_count(&p, &Endpoint::NegInf, &Endpoint::PosInf).unwrap(), distinct.len());
        let isolated = real_roots(&p, &Rational::new(1.into(), 1024.into())).unwrap();
        prop_assert_eq!(isolated.len(), distinct.len());
        for (r, want) in isolated.iter().zip(&distinct) {
            prop_assert!((r.approx() - *want as f64).abs() < 1e-2);
        }
    }
}
