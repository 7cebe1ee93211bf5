//! Places, the ring of S-integers and S-units over Q.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::primes::{factor, is_prime_u64, Factorization, DEFAULT_FACTORING_BUDGET};
use super::rational::{abs_numer, denom, remove_factor, Rational};
use crate::error::{Error, Result};

/// A certified rational prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(BigUint::from(p)))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A place of Q: the absolute value or a p-adic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Archimedean,
    Finite(Prime),
}

/// The finite set of places `S` (Archimedean place implied) together with the
/// factoring budget used by everything that needs non-S factorizations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SContext {
    primes: Vec<u64>,
    factoring_budget: u64,
}

impl SContext {
    pub fn new(primes: impl IntoIterator<Item = u64>, factoring_budget: u64) -> Result<Self> {
        let mut ps: Vec<u64> = primes.into_iter().collect();
        ps.sort_unstable();
        ps.dedup();
        for &p in &ps {
            Prime::new(p)?;
        }
        if factoring_budget == 0 {
            return Err(Error::Invalid("factoring budget must be positive".into()));
        }
        Ok(SContext {
            primes: ps,
            factoring_budget,
        })
    }

    /// `S` with the default factoring budget.
    pub fn with_primes(primes: &[u64]) -> Result<Self> {
        Self::new(primes.iter().copied(), DEFAULT_FACTORING_BUDGET)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn factoring_budget(&self) -> u64 {
        self.factoring_budget
    }

    pub fn places(&self) -> impl Iterator<Item = Place> + '_ {
        std::iter::once(Place::Archimedean)
            .chain(self.primes.iter().map(|&p| Place::Finite(Prime(p))))
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// Splits `n ≥ 1` into its S-supported part and the rest, without factoring.
    pub(crate) fn split(&self, n: &BigUint) -> (BigUint, BigUint) {
        let mut rest = n.clone();
        let mut s_part = BigUint::one();
        for &p in &self.primes {
            let (e, cof) = remove_factor(&rest, p);
            if e > 0 {
                s_part *= super::rational::biguint_pow(&BigUint::from(p), e);
                rest = cof;
            }
        }
        (s_part, rest)
    }

    pub(crate) fn is_supported(&self, n: &BigUint) -> bool {
        !n.is_zero() && self.split(n).1.is_one()
    }
}

/// `ord_p(x)` for `x ≠ 0`.
pub fn ord(p: u64, x: &Rational) -> Result<i64> {
    Prime::new(p)?;
    if x.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    let (up, _) = remove_factor(&abs_numer(x), p);
    let (down, _) = remove_factor(&denom(x), p);
    Ok(up as i64 - down as i64)
}

/// `ord_v(x) ≥ 0` for every prime outside S.
pub fn is_s_integer(s: &SContext, x: &Rational) -> bool {
    s.is_supported(&denom(x))
}

pub fn is_s_unit(s: &SContext, x: &Rational) -> bool {
    !x.is_zero() && s.is_supported(&abs_numer(x)) && s.is_supported(&denom(x))
}

/// `n = s_part · non_s_part` with the non-S part fully factored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SDecomposition {
    #[serde(serialize_with = "crate::heightfn::ser_biguint")]
    pub s_part: BigUint,
    #[serde(serialize_with = "crate::heightfn::ser_biguint")]
    pub non_s_part: BigUint,
    pub non_s_factors: Factorization,
}

pub fn s_decompose(s: &SContext, n: &BigUint) -> Result<SDecomposition> {
    if n.is_zero() {
        return Err(Error::Invalid("S-decomposition of zero".into()));
    }
    let (s_part, non_s_part) = s.split(n);
    let non_s_factors = factor(&non_s_part, s.factoring_budget)?;
    Ok(SDecomposition {
        s_part,
        non_s_part,
        non_s_factors,
    })
}

/// A solution `u + v = 1` in S-units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct UnitPair {
    #[serde(with = "super::rational::serde_str")]
    pub u: Rational,
    #[serde(with = "super::rational::serde_str")]
    pub v: Rational,
}

/// Canonical order on rationals: by numerator, then denominator.
pub fn canonical_cmp(a: &Rational, b: &Rational) -> Ordering {
    a.numer()
        .cmp(b.numer())
        .then_with(|| a.denom().cmp(b.denom()))
}

impl Ord for UnitPair {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(&self.u, &other.u).then_with(|| canonical_cmp(&self.v, &other.v))
    }
}

impl PartialOrd for UnitPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every S-unit `u = ±∏ p^{e_p}` with `|e_p| ≤ bound`.
pub fn bounded_units(s: &SContext, bound: u32) -> Vec<Rational> {
    let b = bound as i64;
    let vectors: Vec<Vec<i64>> = if s.primes().is_empty() {
        vec![Vec::new()]
    } else {
        s.primes()
            .iter()
            .map(|_| -b..=b)
            .multi_cartesian_product()
            .collect()
    };
    let mut out = Vec::with_capacity(vectors.len() * 2);
    for exps in vectors {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (&p, &e) in s.primes().iter().zip(&exps) {
            let pe = num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize);
            if e >= 0 {
                num *= pe;
            } else {
                den *= pe;
            }
        }
        let u = Rational::new(num, den);
        out.push(-u.clone());
        out.push(u);
    }
    out
}

/// All S-unit solutions of `u + v = 1` with `|ord_p(u)| ≤ bound` at every
/// prime of S (`v` is unrestricted), in canonical order.
pub fn unit_equation_solutions(s: &SContext, bound: u32) -> Vec<UnitPair> {
    let candidates = bounded_units(s, bound);
    let one = Rational::one();
    let mut found: Vec<UnitPair> = candidates
        .par_iter()
        .filter_map(|u| {
            let v = &one - u;
            is_s_unit(s, &v).then(|| UnitPair { u: u.clone(), v })
        })
        .collect();
    found.sort();
    found.dedup();
    found
}

/// Reconstructs `x ≠ 0` from its sign and its valuations at the given primes.
pub fn reconstruct(x: &Rational, primes: &[u64]) -> Result<Rational> {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for &p in primes {
        let e = ord(p, x)?;
        let pe = num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize);
        if e > 0 {
            num *= pe;
        } else if e < 0 {
            den *= pe;
        }
    }
    if x.is_negative() {
        num = -num;
    }
    Ok(Rational::new(num, den))
}
