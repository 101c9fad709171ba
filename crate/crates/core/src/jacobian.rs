//! Jacobians and nilpotence certificates.
//!
//! The exact path works on polynomial maps: the characteristic coefficients
//! of `J(h)` are computed over the polynomial ring, and `J(h)` is nilpotent
//! everywhere iff all of them are the zero polynomial. The sampled path is
//! the numeric surrogate for maps with transcendental pieces.

use std::fmt;

use crate::config::RunConfig;
use crate::expr::{Expr, ExprMap, Number, Poly, PolyMap};
use crate::matrix::Matrix;
use crate::numeric::{nonzero_witness, seeded_rng, uniform_point};

#[derive(Clone, Debug, PartialEq)]
pub enum NilpotenceVerdict {
    ProvenNilpotent,
    /// The coefficient of `lambda^lambda_power` in `det(lambda I - J)` is
    /// `value != 0` at `witness`.
    ProvenNot {
        witness: Vec<Number>,
        lambda_power: usize,
        value: Number,
    },
    ProbablyNilpotent {
        samples: usize,
        tol: f64,
    },
    Inconclusive {
        reason: String,
    },
}

impl NilpotenceVerdict {
    pub fn is_proven(&self) -> bool {
        matches!(self, NilpotenceVerdict::ProvenNilpotent)
    }

    pub fn is_nilpotent_claim(&self) -> bool {
        matches!(
            self,
            NilpotenceVerdict::ProvenNilpotent | NilpotenceVerdict::ProbablyNilpotent { .. }
        )
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, NilpotenceVerdict::ProvenNot { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            NilpotenceVerdict::ProvenNilpotent => "ProvenNilpotent",
            NilpotenceVerdict::ProvenNot { .. } => "ProvenNot",
            NilpotenceVerdict::ProbablyNilpotent { .. } => "ProbablyNilpotent",
            NilpotenceVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

pub(crate) fn render_point(p: &[Number]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for NilpotenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NilpotenceVerdict::ProvenNilpotent => write!(f, "ProvenNilpotent"),
            NilpotenceVerdict::ProvenNot { witness, lambda_power, value } => write!(
                f,
                "ProvenNot: coefficient of lambda^{lambda_power} is {value} at {}",
                render_point(witness)
            ),
            NilpotenceVerdict::ProbablyNilpotent { samples, tol } => {
                write!(f, "ProbablyNilpotent ({samples} samples, tol {tol:e})")
            }
            NilpotenceVerdict::Inconclusive { reason } => write!(f, "Inconclusive: {reason}"),
        }
    }
}

pub fn jacobian(m: &ExprMap) -> Matrix<Expr> {
    m.jacobian()
}

/// Coefficients of `lambda^{n-1}, ..., lambda^0` in `det(lambda I - M)`.
pub fn char_poly_coeffs(m: &Matrix<Poly>) -> Vec<Poly> {
    m.char_poly_coeffs()
}

/// Exact verdict on whether `J(m)` is nilpotent at every point.
pub fn is_nilpotent_exact(m: &PolyMap) -> NilpotenceVerdict {
    let n = m.dim();
    let coeffs = char_poly_coeffs(&m.jacobian());
    for (k, c) in coeffs.iter().enumerate() {
        if let Some(w) = nonzero_witness(c, n) {
            let value = c.eval(&w).expect("witness has full arity");
            return NilpotenceVerdict::ProvenNot {
                witness: w.into_iter().map(Number::Exact).collect(),
                lambda_power: n - 1 - k,
                value: Number::Exact(value),
            };
        }
    }
    NilpotenceVerdict::ProvenNilpotent
}

/// `J(m)` unipotent, decided on the perturbation `m - id`.
pub fn is_unipotent(m: &PolyMap) -> NilpotenceVerdict {
    is_nilpotent_exact(&m.perturbation())
}

/// Seeded sampling surrogate: characteristic coefficients of the float
/// Jacobian at uniform points of the configured box.
pub fn is_nilpotent_sampled(m: &ExprMap, cfg: &RunConfig) -> NilpotenceVerdict {
    let n = m.dim();
    let jac = m.jacobian();
    let mut rng = seeded_rng(cfg.seed);
    let (lo, hi) = cfg.sample_box;
    let tol = cfg.nilpotence_tol;
    let mut borderline = None;
    for _ in 0..cfg.nilpotence_samples {
        let p = uniform_point(&mut rng, n, lo, hi);
        let jp = match jac.try_map(|e| e.eval(&p, m.phi())) {
            Ok(j) => j,
            Err(e) => {
                return NilpotenceVerdict::Inconclusive {
                    reason: format!("evaluation failed at {p:?}: {e}"),
                }
            }
        };
        let coeffs = jp.char_poly_coeffs();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return NilpotenceVerdict::Inconclusive {
                reason: format!("non-finite Jacobian at {p:?}"),
            };
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.abs() > 10.0 * tol {
                return NilpotenceVerdict::ProvenNot {
                    witness: p.iter().map(|&x| Number::Float(x)).collect(),
                    lambda_power: n - 1 - k,
                    value: Number::Float(*c),
                };
            }
            if c.abs() >= tol && borderline.is_none() {
                borderline = Some((p.clone(), *c));
            }
        }
    }
    match borderline {
        Some((p, c)) => NilpotenceVerdict::Inconclusive {
            reason: format!("coefficient {c:e} at {p:?} lies between tol and 10*tol"),
        },
        None => NilpotenceVerdict::ProbablyNilpotent {
            samples: cfg.nilpotence_samples,
            tol,
        },
    }
}

/// Sampled unipotence of `J(m)`, decided on `m - id`.
pub fn is_unipotent_sampled(m: &ExprMap, cfg: &RunConfig) -> NilpotenceVerdict {
    is_nilpotent_sampled(&m.perturbation(), cfg)
}

/// `M^k` is the zero matrix of polynomials.
pub fn matrix_power_zero(m: &Matrix<Poly>, k: u32) -> bool {
    m.pow(k).is_zero()
}

/// Smallest `k <= n` with `M^k = 0`, if any.
pub fn nilpotency_index(m: &Matrix<Poly>) -> Option<u32> {
    let mut acc = Matrix::identity(m.rows());
    for k in 1..=m.rows() as u32 {
        acc = acc.mul(m);
        if acc.is_zero() {
            return Some(k);
        }
    }
    None
}
