//! Reference maps shared by the tests, the acceptance suite and the CLI's
//! `verify-example` command.

use crate::expr::{parse_map, parse_phi, ratio, Expr, ExprMap, PolyMap, Rational};

fn map(text: &str) -> ExprMap {
    parse_map(text).expect("fixture source parses")
}

fn poly(text: &str) -> PolyMap {
    map(text).to_poly().expect("fixture is polynomial")
}

/// `(x + 5 cos(3x + 5y), y - 3 cos(3x + 5y))`.
pub fn example1() -> ExprMap {
    map("dim 2; f1 = x1 + 5*cos(3*x1 + 5*x2); f2 = x2 - 3*cos(3*x1 + 5*x2);")
}

pub fn example1_inverse() -> ExprMap {
    map("dim 2; f1 = x1 - 5*cos(3*x1 + 5*x2); f2 = x2 + 3*cos(3*x1 + 5*x2);")
}

/// Upper triangular data `(a(y,z,w), b(z,w), c(w), d)` in the variables
/// `x2, x3, x4` (resp. `x3, x4` and `x4`).
#[derive(Clone, Debug)]
pub struct Triangular4 {
    pub a: &'static str,
    pub b: &'static str,
    pub c: &'static str,
    pub d: Rational,
}

impl Triangular4 {
    pub fn map(&self) -> ExprMap {
        map(&format!(
            "dim 4; f1 = x1 + ({}); f2 = x2 + ({}); f3 = x3 + ({}); f4 = x4 + ({});",
            self.a, self.b, self.c, self.d
        ))
    }

    /// The compositional inverse obtained by solving from the last
    /// coordinate upwards.
    pub fn inverse(&self) -> ExprMap {
        let v = Expr::sub(Expr::Var(3), Expr::Const(self.d.clone()));
        let c = parse_component(self.c);
        let u = Expr::sub(Expr::Var(2), c.substitute(&[Expr::zero(), Expr::zero(), Expr::zero(), v.clone()]));
        let b = parse_component(self.b);
        let t = Expr::sub(
            Expr::Var(1),
            b.substitute(&[Expr::zero(), Expr::zero(), u.clone(), v.clone()]),
        );
        let a = parse_component(self.a);
        let s = Expr::sub(Expr::Var(0), a.substitute(&[Expr::zero(), t.clone(), u.clone(), v.clone()]));
        ExprMap::new(vec![s, t, u, v], None).expect("inverse uses x1..x4")
    }
}

fn parse_component(text: &str) -> Expr {
    map(&format!("dim 4; f1 = {text}; f2 = 0; f3 = 0; f4 = 0;")).components()[0].clone()
}

/// Polynomial instances of the four-variable triangular family, degrees at
/// most 3.
pub fn example2_fixtures() -> Vec<Triangular4> {
    vec![
        Triangular4 { a: "x2*x3 + x4^3", b: "x3^2 - x4", c: "2*x4^2", d: ratio(1, 1) },
        Triangular4 { a: "x2^3 - x3*x4", b: "x3*x4 + 1", c: "x4^3 - x4", d: ratio(-3, 2) },
        Triangular4 { a: "x3^2*x4 - 2*x2", b: "x3^3", c: "-x4^2 + 1/2", d: ratio(0, 1) },
    ]
}

/// `(x + z phi(x + zy), y - phi(x + zy), z)`.
pub fn example3(phi: &str) -> ExprMap {
    map(&format!("dim 3; phi = {phi}; f1 = x1 + x3*phi(x1 + x3*x2); f2 = x2 - phi(x1 + x3*x2); f3 = x3;"))
}

pub fn example3_inverse(phi: &str) -> ExprMap {
    map(&format!("dim 3; phi = {phi}; f1 = x1 - x3*phi(x1 + x2*x3); f2 = x2 + phi(x1 + x2*x3); f3 = x3;"))
}

/// The escaping orbit of `dp/dt = -f(p)` for [`example3`] with `phi = -t^2`.
pub fn example3_orbit(t: f64) -> [f64; 3] {
    [18.0 * t.exp(), -12.0 * (2.0 * t).exp(), (-t).exp()]
}

pub fn example3_orbit_derivative(t: f64) -> [f64; 3] {
    [18.0 * t.exp(), -24.0 * (2.0 * t).exp(), -(-t).exp()]
}

/// `(x + phi(y - x^2), y + z + 2x phi(y - x^2), z - phi(y - x^2)^2)`.
pub fn example4(phi: &str) -> ExprMap {
    map(&format!(
        "dim 3; phi = {phi}; f1 = x1 + phi(x2 - x1^2); f2 = x2 + x3 + 2*x1*phi(x2 - x1^2); f3 = x3 - phi(x2 - x1^2)^2;"
    ))
}

/// `(u - a, v - w - 2ua + a^2, w + a^2)` with `a = phi(v - u^2 - w)`.
pub fn example4_inverse(phi: &str) -> ExprMap {
    let a = "phi(x2 - x1^2 - x3)";
    map(&format!(
        "dim 3; phi = {phi}; f1 = x1 - {a}; f2 = x2 - x3 - 2*x1*{a} + {a}^2; f3 = x3 + {a}^2;"
    ))
}

/// Perturbation part of [`example4`].
pub fn example5_h(phi: &str) -> ExprMap {
    map(&format!(
        "dim 3; phi = {phi}; f1 = phi(x2 - x1^2); f2 = x3 + 2*x1*phi(x2 - x1^2); f3 = -phi(x2 - x1^2)^2;"
    ))
}

/// A period-3 orbit of [`example5_h`] when `phi(0) = 0` and `phi(-1) = -1`.
pub fn example5_orbit() -> [[i64; 3]; 3] {
    [[-1, 1, -1], [0, -1, 0], [-1, 0, -1]]
}

/// `(x + y^3, y - x^3)`.
pub fn randall_example() -> PolyMap {
    poly("dim 2; f1 = x1 + x2^3; f2 = x2 - x1^3;")
}

/// `(y + 1, -x + 2)`: affine with `det(J(f) - I) = 2`, single fixed point
/// `(3/2, 1/2)`.
pub fn unique_fixed_point_example() -> PolyMap {
    poly("dim 2; f1 = x2 + 1; f2 = -x1 + 2;")
}

/// Bounded-range map used as a control for fixed-point enumeration.
pub fn bounded_example() -> ExprMap {
    map("dim 2; f1 = 1/2*cos(x1 + x2); f2 = 1/3*sin(x1 - x2);")
}

pub fn phi(text: &str) -> Expr {
    parse_phi(text).expect("phi source parses")
}
