//! Exact symbolic-numeric toolkit for self-maps of `R^n` whose Jacobian is
//! unipotent (`f = id + h` with `J(h)` nilpotent).
//!
//! The crate is organized bottom-up:
//!
//! * [`expr`]: rationals, sparse polynomials, expression trees, maps, the
//!   map-definition text format.
//! * [`matrix`]: small dense matrices over exact and floating rings.
//! * [`jacobian`]: Jacobians and nilpotence certificates.
//! * [`triangular`]: strong nilpotence and simultaneous triangularization.
//! * [`newclass`]: recursive construction of New Class perturbations.
//! * [`inversion`]: composition-power inversion and fixed-point search.
//! * [`planar`]: the two-dimensional normal form.
//! * [`infinity`]: leading forms, zeros at infinity, unique fixed points.
//! * [`dynamics`]: flows, iteration and spectral sampling.
//! * [`fixtures`]: the reference maps used throughout the tests and the CLI.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod infinity;
pub mod inversion;
pub mod jacobian;
pub mod matrix;
pub mod newclass;
pub mod numeric;
pub mod planar;
pub mod triangular;

pub use error::{Error, Result};
pub use expr::{parse_map, Expr, ExprMap, Func, Monomial, Number, Poly, PolyMap, Rational, Scalar};
pub use matrix::Matrix;
