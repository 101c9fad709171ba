use nilmap::expr::{parse_map, ratio, Expr, ExprMap, Func, Monomial, Poly, PolyMap, Rational};
use nilmap::Matrix;
use proptest::prelude::*;

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn arb_poly(nvars: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    let term = (prop::collection::vec(0..=max_exp, nvars), arb_rational())
        .prop_map(|(e, c)| (Monomial::from_exponents(e), c));
    prop::collection::vec(term, 0..=max_terms).prop_map(Poly::from_terms)
}

fn arb_poly_map(n: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = PolyMap> {
    prop::collection::vec(arb_poly(n, max_exp, max_terms), n).prop_map(|c| PolyMap::new(c).unwrap())
}

fn arb_expr(nvars: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..nvars).prop_map(Expr::var),
        arb_rational().prop_map(Expr::Const),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::product),
            (inner.clone(), 2u32..=3).prop_map(|(e, k)| Expr::power(e, k)),
            inner.clone().prop_map(Expr::negate),
            (prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)], inner)
                .prop_map(|(f, e)| Expr::apply(f, e)),
        ]
    })
}

fn arb_matrix(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec(arb_rational(), n * n)
        .prop_map(move |v| Matrix::from_fn(n, n, |i, j| v[i * n + j].clone()))
}

fn arb_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(arb_rational(), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_ring_laws(a in arb_poly(3, 3, 5), b in arb_poly(3, 3, 5), c in arb_poly(3, 3, 5)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Poly::one(), a.clone());
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in arb_poly(3, 3, 5), b in arb_poly(3, 3, 5), x in arb_point(3)) {
        let (va, vb) = (a.eval(&x).unwrap(), b.eval(&x).unwrap());
        prop_assert_eq!((&a + &b).eval(&x).unwrap(), &va + &vb);
        prop_assert_eq!((&a * &b).eval(&x).unwrap(), va * vb);
    }

    #[test]
    fn partials_obey_leibniz(a in arb_poly(2, 4, 5), b in arb_poly(2, 4, 5), v in 0usize..2) {
        prop_assert_eq!((&a * &b).partial(v), &(&a.partial(v) * &b) + &(&a * &b.partial(v)));
    }

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(2), x in prop::collection::vec(-1.0f64..1.0, 2), v in 0usize..2) {
        let d = e.differentiate(v).eval(&x, None).unwrap();
        let h = 1e-5;
        let mut up = x.clone();
        let mut down = x.clone();
        up[v] += h;
        down[v] -= h;
        let fd = (e.eval(&up, None).unwrap() - e.eval(&down, None).unwrap()) / (2.0 * h);
        let scale = 1.0f64.max(d.abs()).max(e.eval(&x, None).unwrap().abs());
        prop_assume!(d.is_finite() && fd.is_finite() && scale < 1e6);
        prop_assert!((d - fd).abs() <= 1e-6 * scale, "{} vs {} for {:?}", d, fd, e);
    }

    #[test]
    fn symbolic_and_polynomial_derivatives_agree(a in arb_poly(3, 3, 6), v in 0usize..3) {
        let e = Expr::from_poly(&a);
        prop_assert_eq!(e.differentiate(v).to_poly(None).unwrap(), a.partial(v));
    }

    #[test]
    fn composition_is_associative(
        f in arb_poly_map(2, 2, 3),
        g in arb_poly_map(2, 2, 3),
        h in arb_poly_map(2, 2, 3),
    ) {
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn composition_matches_pointwise_evaluation(f in arb_poly_map(3, 2, 4), g in arb_poly_map(3, 2, 4), x in arb_point(3)) {
        let fg = f.compose(&g).unwrap();
        prop_assert_eq!(fg.evaluate(&x).unwrap(), f.evaluate(&g.evaluate(&x).unwrap()).unwrap());
    }

    #[test]
    fn poly_map_render_round_trips(f in arb_poly_map(3, 3, 5)) {
        let back = parse_map(&f.render()).unwrap().to_poly().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn expr_map_render_round_trips(c in prop::collection::vec(arb_expr(3), 3), x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let f = ExprMap::new(c, None).unwrap();
        let text = f.render();
        let back = parse_map(&text).unwrap();
        prop_assert_eq!(back.render(), text);
        for (a, b) in f.evaluate(&x).unwrap().iter().zip(back.evaluate(&x).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn cayley_hamilton_rational(m in (1usize..=4).prop_flat_map(arb_matrix)) {
        let n = m.rows();
        let coeffs = m.char_poly_coeffs();
        let mut acc = m.pow(n as u32);
        for (k, c) in coeffs.iter().enumerate() {
            acc = acc.add(&m.pow((n - 1 - k) as u32).scale(c));
        }
        prop_assert!(acc.is_zero());
        prop_assert_eq!(m.det_gauss(), m.det());
    }

    #[test]
    fn cayley_hamilton_on_jacobians(f in arb_poly_map(2, 2, 3)) {
        let j = f.jacobian();
        let coeffs = j.char_poly_coeffs();
        let mut acc = j.pow(2);
        for (k, c) in coeffs.iter().enumerate() {
            acc = acc.add(&j.pow((1 - k) as u32).scale(c));
        }
        prop_assert!(acc.is_zero());
    }
}
