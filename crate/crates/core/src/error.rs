use num_bigint::BigUint;
use thiserror::Error;

use crate::qsarith::Rational;

/// Failures raised by the arithmetic layers.
///
/// Mathematical verdicts (a hypothesis failing, an inequality violated) are
/// never errors; they are reported as data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation of zero undefined")]
    ValuationOfZero,

    #[error("{0} is not prime")]
    NotPrime(BigUint),

    #[error("factoring budget exceeded: unfactored cofactor {cofactor}")]
    BudgetExceeded { cofactor: BigUint },

    #[error("counting function undefined at zero")]
    CountingAtZero,

    #[error("truncation level must be positive")]
    ZeroTruncation,

    #[error("cannot parse rational {0:?} (expected \"a\" or \"a/b\")")]
    ParseRational(String),

    #[error("{0} is not an S-integer")]
    NotSInteger(Rational),

    #[error("polynomial value vanishes at {0}")]
    VanishingValue(Rational),

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("discriminant of a constant polynomial")]
    ConstantPolynomial,

    #[error("duplicate root {0}")]
    DuplicateRoot(Rational),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("hypotheses of the family are unmet ({0}); run validate-poly for details")]
    HypothesesUnmet(String),

    #[error("linear form system: {0}")]
    InvalidSystem(String),

    #[error("forms {witness:?} are not in general position")]
    NotGeneralPosition { witness: Vec<usize> },

    #[error("zero tuple has no projective normalization")]
    ZeroPoint,

    #[error("point is not primitive outside S: {0}")]
    NotPrimitive(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
