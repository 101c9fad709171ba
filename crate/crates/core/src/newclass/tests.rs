use super::*;
use crate::config::RunConfig;
use crate::expr::{parse_map, parse_phi, rat, ratio, Scalar};
use crate::jacobian::is_nilpotent_exact;
use crate::numeric::{random_rational, seeded_rng};

fn example3_h(phi: &str) -> PolyMap {
    parse_map(&format!(
        "dim 3; phi = {phi}; f1 = x1 + x3*phi(x1 + x3*x2); f2 = x2 - phi(x1 + x3*x2); f3 = x3;"
    ))
    .unwrap()
    .to_poly()
    .unwrap()
    .perturbation()
}

#[test]
fn reproduces_example_three() {
    for phi in ["-t^2", "t", "t^3 - 2*t + 1"] {
        let r = example3_recipe(parse_phi(phi).unwrap());
        assert_eq!(r.build_poly().unwrap(), example3_h(phi), "phi = {phi}");
    }
}

#[test]
fn trivial_recipe_is_zero() {
    let r = NewClassRecipe::trivial(4, 3);
    assert_eq!(r.level(), 3);
    assert_eq!(r.build_poly().unwrap(), PolyMap::zero(4));
    let rep = verify_claims(&r, &RunConfig::default(), 5).unwrap();
    assert_eq!(rep.power_value, vec![rat(0); 4]);
}

#[test]
fn planar_recipe_matches_normal_form() {
    let r = planar_recipe(&rat(3), &rat(5), &ratio(1, 2), &rat(-1), parse_phi("t^2").unwrap());
    let want = parse_map("dim 2; f1 = 5*(3*x1 + 5*x2)^2 + 1/2; f2 = -3*(3*x1 + 5*x2)^2 - 1;")
        .unwrap()
        .to_poly()
        .unwrap();
    assert_eq!(r.build_poly().unwrap(), want);
    let rep = verify_claims(&r, &RunConfig::default(), 20).unwrap();
    assert!(rep.nilpotent);
}

#[test]
fn adjoint_identity_on_random_rational_matrix() {
    let mut rng = seeded_rng(3);
    let m = Matrix::from_fn(3, 3, |_, _| random_rational(&mut rng, 9, 4));
    let det = m.det_gauss();
    assert_eq!(m.mul(&m.classical_adjoint()), Matrix::identity(3).scale(&det));
}

#[test]
fn example_three_claims() {
    let r = example3_recipe(parse_phi("-t^2").unwrap());
    let rep = verify_claims(&r, &RunConfig::default(), 100).unwrap();
    assert_eq!(rep.power_value, vec![rat(0); 3]);
    assert_eq!(rep.levels.len(), 2);
    let h = r.build_poly().unwrap();
    let y = h.plus_identity().evaluate(&[rat(1), rat(1), rat(1)]).unwrap();
    assert_eq!(invert_exact(&h, &y).unwrap(), vec![rat(1); 3]);
    let hf = r.build().unwrap();
    let x: Vec<f64> = invert(&hf, &[y[0].approx_f64(), y[1].approx_f64(), y[2].approx_f64()]).unwrap();
    assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn closure_operations() {
    let cfg = RunConfig::default();
    let r = example3_recipe(parse_phi("-t^2").unwrap());
    assert_eq!(r.scale(&rat(0)).build_poly().unwrap(), PolyMap::zero(3));
    let h = r.build_poly().unwrap();
    assert_eq!(r.scale(&ratio(-2, 3)).build_poly().unwrap(), h.scale(&ratio(-2, 3)));
    assert_eq!(r.conjugate(&Matrix::identity(3)).unwrap().build_poly().unwrap(), h);

    let t = Matrix::from_i64_rows(&[&[1, 0, 0], &[0, 2, 0], &[1, 0, 1]]);
    let c = r.conjugate(&t).unwrap();
    let hc = c.build_poly().unwrap();
    let ta = t.classical_adjoint();
    assert_eq!(hc, h.compose(&PolyMap::linear(&t)).unwrap().left_multiply(&ta));
    assert!(is_nilpotent_exact(&hc).is_proven());
    verify_claims(&c, &cfg, 10).unwrap();

    let o = r.offset(&[rat(1), ratio(1, 2), rat(-3)]).unwrap();
    let ho = o.build_poly().unwrap();
    assert_eq!(ho, h.add(&PolyMap::constant(&[rat(1), ratio(1, 2), rat(-3)])));
    verify_claims(&o, &cfg, 10).unwrap();
}

#[test]
fn affine_reparameterization_stays_in_class() {
    let cfg = RunConfig::default();
    let r = example3_recipe(parse_phi("-t^2").unwrap());
    let delta = Expr::add(Expr::int(2), Expr::Var(2));
    let eps = vec![Expr::Var(2), Expr::int(-1)];
    let rr = r.affine_reparameterize(&delta, &eps).unwrap();
    let images = vec![
        Poly::var(0).scale(&rat(2)) + Poly::var(2) * Poly::var(0) + Poly::var(2),
        Poly::var(1).scale(&rat(2)) + Poly::var(2) * Poly::var(1) - Poly::one(),
        Poly::var(2),
    ];
    let want = PolyMap::new(
        r.build_poly().unwrap().components().iter().map(|c| c.substitute(&images)).collect(),
    )
    .unwrap();
    assert_eq!(rr.build_poly().unwrap(), want);
    verify_claims(&rr, &cfg, 10).unwrap();
    assert!(r.affine_reparameterize(&Expr::Var(0), &eps).is_err());
}

#[test]
fn recipe_text_round_trip_and_dependence_errors() {
    let src = "dim 3; phi = -t^2; level 2 { M = [[1, 0], [1, x3]]; C = [0, 0]; level 1 { h = phi(x2); } }";
    let r = parse_recipe(src).unwrap();
    assert_eq!(r, example3_recipe(parse_phi("-t^2").unwrap()));
    assert_eq!(parse_recipe(&r.render()).unwrap(), r);

    match parse_recipe("dim 2; level 2 { M = [[x1, 0], [0, 1]]; level 1 { h = x2; } }") {
        Err(Error::Dependence(msg)) => assert!(msg.contains("M[1][1]") && msg.contains("x1"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_recipe("dim 2; level 1 { h = x1; }"),
        Err(Error::Dependence(_))
    ));
    assert!(matches!(
        parse_recipe("dim 3; level 3 { M = [[1,0,0],[0,1,0],[0,0,1]]; level 1 { h = x2; } }"),
        Err(Error::Syntax { .. })
    ));
}

#[test]
fn transcendental_recipe_numeric_claims() {
    let r = planar_recipe(&rat(3), &rat(5), &rat(0), &rat(0), parse_phi("cos(t)").unwrap());
    assert!(!r.is_polynomial());
    let rep = verify_claims_numeric(&r, &RunConfig::default()).unwrap();
    assert!(rep.power_spread < 1e-8);
    assert!(rep.inverse_residual < 1e-9);
}

#[test]
fn random_recipes_verify() {
    let cfg = RunConfig::default();
    let mut rng = seeded_rng(11);
    for n in 1..=3 {
        let r = random_recipe(&mut rng, n, 2, 6);
        verify_claims(&r, &cfg, 5).unwrap();
    }
}
