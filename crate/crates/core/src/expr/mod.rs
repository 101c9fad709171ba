//! Exact rationals, canonical sparse polynomials, expression trees and maps.

mod cubic;
mod map;
mod parse;
mod poly;
mod rational;
mod scalar;
mod tree;

pub use cubic::make_cubic_linear;
pub use map::{ExprMap, PolyMap};
pub use parse::{parse_map, parse_phi};
pub(crate) use map::eval_matrix;
pub(crate) use parse::{parse_optional_phi, Parser, Scope};
pub use poly::{Monomial, Poly, Substitution};
pub use rational::{parse_rational, rat, ratio, Number, Rational};
pub use scalar::{Scalar, Transcendental};
pub use tree::{Expr, Func};
