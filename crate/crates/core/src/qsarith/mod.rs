//! Exact arithmetic over Q: rationals, primes, valuations, S-integers and
//! the S-unit equation.

pub mod primes;
pub mod rational;
pub mod sunit;

pub use primes::{
    certify_prime, factor, factor_signed, is_prime_u64, Factorization, DEFAULT_FACTORING_BUDGET,
};
pub use rational::{format_rational, int, parse_rational, rat, Rational};
pub use sunit::{
    bounded_units, canonical_cmp, is_s_integer, is_s_unit, ord, reconstruct, s_decompose,
    unit_equation_solutions, Place, Prime, SContext, SDecomposition, UnitPair,
};
