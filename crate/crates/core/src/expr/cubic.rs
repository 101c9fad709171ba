use crate::expr::{Monomial, Poly, PolyMap};
use crate::matrix::Matrix;
use crate::expr::Rational;

/// `x -> x + (A x)^3` with the cube taken componentwise.
pub fn make_cubic_linear(a: &Matrix<Rational>) -> PolyMap {
    assert!(a.is_square(), "cubic-linear maps need a square matrix");
    let n = a.rows();
    let components = (0..n)
        .map(|i| {
            let lin = Poly::from_terms((0..n).map(|j| (Monomial::var(j), a.get(i, j).clone())));
            &Poly::var(i) + &lin.pow(3)
        })
        .collect();
    PolyMap::new(components).expect("components use only x1..xn")
}
