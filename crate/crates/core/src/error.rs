//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclotomic order {order} exceeds the configured cap {cap}")]
    OrderCapExceeded { order: u64, cap: u64 },

    #[error("inverse of zero")]
    ZeroInverse,

    #[error("cannot embed Q(zeta_{from}) into Q(zeta_{to}): {from} does not divide {to}")]
    EmbedOrder { from: u64, to: u64 },

    #[error("root of unity denominator must be positive")]
    ZeroDenominator,

    #[error("series multiplication requires nonnegative exponents (found {0})")]
    NegativeExponent(String),

    #[error("comparison order {upto} exceeds a series truncation {truncation}")]
    TruncationExceeded { upto: String, truncation: String },

    #[error("evaluation point tau_im must be positive (got {0})")]
    NonpositiveTau(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("lattice inclusion violated: {0}")]
    LatticeInclusion(String),

    #[error("invalid degree triple ({d1}, {d2}, {d}): requires d > d1, d > d2, d1 + d2 - d > 0")]
    InvalidTriple { d1: String, d2: String, d: String },

    #[error("invalid quadratic form ({a}, {b}, {c}): requires a, b, c > 0 and b^2 > ac")]
    InvalidForm { a: String, b: String, c: String },

    #[error("integrality condition fails for ({d1}, {d2}, {d}): {detail}")]
    IntegralityCondition {
        d1: u32,
        d2: u32,
        d: u32,
        detail: String,
    },

    #[error("degenerate shift: the line {axis} = {value} meets the support lattice")]
    DegenerateShift { axis: &'static str, value: String },

    #[error("shift parameters are not generic for this coset: {0}")]
    GenericityViolation(String),

    #[error("coset table would need {needed} entries, exceeding the cap {cap}")]
    CosetCapExceeded { needed: String, cap: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no admissible scale N <= {cap}: at N = {last_tried}, first failing condition: {detail}")]
    ScaleNotFound {
        cap: u64,
        last_tried: u64,
        detail: String,
    },

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Process exit code for the CLI: 2 input, 3 precondition, 5 cap exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 2,
            Error::ScaleNotFound { .. } => 5,
            _ => 3,
        }
    }
}
