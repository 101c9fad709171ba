use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("variable x{} out of range for dimension {dim}", .index + 1)]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("phi is used but no definition is attached")]
    MissingPhi,
    #[error("conflicting phi definitions")]
    ConflictingPhi,
    #[error("inexact arithmetic required: {0} cannot be evaluated exactly")]
    InexactRequired(String),
    #[error("not polynomial: {0}")]
    NotPolynomial(String),
    #[error("resource cap exceeded: {what} ({count} > {cap})")]
    ResourceCap {
        what: &'static str,
        count: usize,
        cap: usize,
    },
    #[error("family is not strongly nilpotent: common kernel vanished at stage {stage}")]
    NotStronglyNilpotent { stage: usize },
    #[error("dependence restriction violated: {0}")]
    Dependence(String),
    #[error("claim {claim} failed: {detail}")]
    ClaimFailed { claim: &'static str, detail: String },
    #[error("composition power did not become constant (starts disagree by {gap:e})")]
    ConstancyNotReached { gap: f64 },
    #[error("candidate preimage does not map to the target (residual {residual:e})")]
    NotAnInverse { residual: f64 },
    #[error("map is not in planar normal form: {0}")]
    NotPlanarNormalizable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular matrix")]
    Singular,
}
