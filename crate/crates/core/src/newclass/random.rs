use rand::Rng;

use super::{NewClassRecipe, RecipeNode};
use crate::expr::{Expr, Monomial, Poly, Rational};
use crate::matrix::Matrix;
use crate::numeric::SeededRng;

fn small_rational(rng: &mut SeededRng) -> Rational {
    let p: i64 = rng.gen_range(-3..=3);
    let q: i64 = rng.gen_range(1..=2);
    Rational::new(p.into(), q.into())
}

/// Sparse polynomial in the variables `vars` with at most `terms` terms of
/// total degree at most `max_degree`.
fn random_poly(rng: &mut SeededRng, vars: &[usize], max_degree: u32, terms: usize, constant: bool) -> Poly {
    let mut p = if constant { Poly::constant(small_rational(rng)) } else { Poly::zero() };
    if vars.is_empty() {
        return p;
    }
    for _ in 0..rng.gen_range(0..=terms) {
        let d = rng.gen_range(1..=max_degree.max(1));
        let mut exps = vec![0u32; vars.iter().max().map_or(0, |v| v + 1)];
        for _ in 0..d {
            exps[vars[rng.gen_range(0..vars.len())]] += 1;
        }
        p = &p + &Poly::monomial(Monomial::from_exponents(exps), small_rational(rng));
    }
    p
}

fn node(rng: &mut SeededRng, n: usize, level: usize, max_degree: u32) -> RecipeNode {
    let params: Vec<usize> = (level..n).collect();
    if level == 1 {
        let vars: Vec<usize> = (1..n).collect();
        return RecipeNode::Base { h: Expr::from_poly(&random_poly(rng, &vars, max_degree, 2, true)) };
    }
    let inner = node(rng, n, level - 1, max_degree);
    // Entries mostly constant; at most one low-degree parameter term each.
    let m = Matrix::from_fn(level, level, |_, _| {
        let terms = usize::from(rng.gen_bool(0.3));
        Expr::from_poly(&random_poly(rng, &params, max_degree, terms, true))
    });
    let offset = (0..level)
        .map(|_| {
            let constant = rng.gen_bool(0.5);
            Expr::from_poly(&random_poly(rng, &params, max_degree, 1, constant))
        })
        .collect();
    RecipeNode::Lift { m, offset, inner: Box::new(inner) }
}

/// Seeded random polynomial recipe of full level `n` with entries of degree
/// at most `max_degree`. Candidates whose built map exceeds
/// `max_map_degree` are redrawn so the exact checks stay tractable.
pub fn random_recipe(rng: &mut SeededRng, n: usize, max_degree: u32, max_map_degree: u32) -> NewClassRecipe {
    loop {
        let recipe = NewClassRecipe::new(n, None, node(rng, n, n, max_degree)).expect("random recipe respects dependences");
        let degree = recipe.build_poly().expect("polynomial recipe").degree().unwrap_or(0);
        if degree <= max_map_degree {
            return recipe;
        }
    }
}
