//! Primality certification and budgeted factorization.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Miller–Rabin with these bases is deterministic below 3.317·10^24.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Default factoring budget: every integer up to 10^12 factors completely.
pub const DEFAULT_FACTORING_BUDGET: u64 = 1_000_000_000_000;

fn mr_limit() -> BigUint {
    BigUint::parse_bytes(b"3317044064679887385961981", 10).expect("literal")
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Certified primality for integers below 3.3·10^24; `None` above that range.
pub fn certify_prime(n: &BigUint) -> Option<bool> {
    if let Some(small) = n.to_u64() {
        return Some(is_prime_u64(small));
    }
    if *n >= mr_limit() {
        return None;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return Some(false);
        }
    }
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u8), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return Some(false);
    }
    Some(true)
}

/// Exact prime factorization `sign · ∏ p^e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub sign: i8,
    #[serde(serialize_with = "ser_factors")]
    pub factors: BTreeMap<BigUint, u32>,
}

fn ser_factors<S: serde::Serializer>(
    factors: &BTreeMap<BigUint, u32>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(factors.len()))?;
    for (p, e) in factors {
        map.serialize_entry(&p.to_string(), e)?;
    }
    map.end()
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mag: BigUint = self
            .factors
            .iter()
            .map(|(p, &e)| crate::qsarith::rational::biguint_pow(p, e))
            .product();
        if self.sign < 0 {
            -BigInt::from(mag)
        } else {
            BigInt::from(mag)
        }
    }

    pub fn exponent(&self, p: &BigUint) -> u32 {
        self.factors.get(p).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Factors `n ≥ 1` completely by trial division up to `√budget`, accepting a
/// remaining cofactor only when it is certifiably prime.
pub fn factor(n: &BigUint, budget: u64) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Invalid("cannot factor zero".into()));
    }
    let limit = budget.sqrt().max(1);
    let mut factors = BTreeMap::new();
    let mut rest = n.clone();
    let mut d: u64 = 2;
    if certify_prime(&rest) == Some(true) {
        factors.insert(rest, 1);
        return Ok(Factorization { sign: 1, factors });
    }
    // Big cofactors: divide by small primes until the rest fits a machine word.
    while rest.to_u64().is_none() {
        if d > limit {
            return Err(Error::BudgetExceeded { cofactor: rest });
        }
        let (e, cof) = crate::qsarith::rational::remove_factor(&rest, d);
        if e > 0 {
            factors.insert(BigUint::from(d), e);
            rest = cof;
            if certify_prime(&rest) == Some(true) {
                *factors.entry(rest).or_insert(0) += 1;
                return Ok(Factorization { sign: 1, factors });
            }
        }
        d = next_candidate(d);
    }

    let mut r = rest.to_u64().expect("fits u64");
    if r > 1 && is_prime_u64(r) {
        *factors.entry(BigUint::from(r)).or_insert(0) += 1;
        r = 1;
    }
    while r > 1 {
        if d.saturating_mul(d) > r {
            *factors.entry(BigUint::from(r)).or_insert(0) += 1;
            r = 1;
            break;
        }
        if d > limit {
            return Err(Error::BudgetExceeded {
                cofactor: BigUint::from(r),
            });
        }
        if r.is_multiple_of(d) {
            let mut e = 0;
            while r.is_multiple_of(d) {
                r /= d;
                e += 1;
            }
            *factors.entry(BigUint::from(d)).or_insert(0) += e;
            if r > 1 && is_prime_u64(r) {
                *factors.entry(BigUint::from(r)).or_insert(0) += 1;
                r = 1;
            }
        }
        d = next_candidate(d);
    }
    debug_assert_eq!(r, 1);
    Ok(Factorization { sign: 1, factors })
}

/// Signed variant of [`factor`]; `n ≠ 0`.
pub fn factor_signed(n: &BigInt, budget: u64) -> Result<Factorization> {
    let mut f = factor(n.magnitude(), budget)?;
    if n.sign() == num_bigint::Sign::Minus {
        f.sign = -1;
    }
    Ok(f)
}

fn next_candidate(d: u64) -> u64 {
    if d == 2 {
        3
    } else {
        d + 2
    }
}

/// Primes up to `n` by sieve.
pub fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            (i * i..=n).step_by(i).for_each(|j| sieve[j] = false);
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(i, _)| i as u64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fac(n: u64) -> Vec<(u64, u32)> {
        factor(&BigUint::from(n), DEFAULT_FACTORING_BUDGET)
            .unwrap()
            .factors
            .into_iter()
            .map(|(p, e)| (p.to_u64().unwrap(), e))
            .collect()
    }

    #[test]
    fn small_factorizations() {
        assert_eq!(fac(80), vec![(2, 4), (5, 1)]);
        assert!(fac(1).is_empty());
        assert_eq!(fac(728), vec![(2, 3), (7, 1), (13, 1)]);
        assert_eq!(fac(97), vec![(97, 1)]);
    }

    #[test]
    fn primality_matches_sieve() {
        let sieve: std::collections::HashSet<u64> = primes_up_to(10_000).into_iter().collect();
        for n in 0..10_000u64 {
            assert_eq!(is_prime_u64(n), sieve.contains(&n), "n = {n}");
        }
    }

    #[test]
    fn large_prime_cofactor_is_certified() {
        // 2^61 - 1 is prime; 3 · (2^61 - 1) factors via the certificate.
        let m61 = (BigUint::one() << 61) - BigUint::one();
        let n = &m61 * 3u32;
        let f = factor(&n, 1000).unwrap();
        assert_eq!(f.exponent(&m61), 1);
        assert_eq!(f.exponent(&BigUint::from(3u32)), 1);
    }

    #[test]
    fn budget_exceeded_names_cofactor() {
        // 1000003 · 1000033 has no factor below √budget = 1000.
        let n = BigUint::from(1_000_003u64 * 1_000_033u64);
        match factor(&n, 1_000_000) {
            Err(Error::BudgetExceeded { cofactor }) => assert_eq!(cofactor, n),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn big_products_of_small_primes() {
        let n = num_traits::pow(BigUint::from(6u32), 40) * 1_000_003u64;
        let f = factor(&n, 1_000_000).unwrap();
        assert_eq!(f.exponent(&BigUint::from(2u32)), 40);
        assert_eq!(f.exponent(&BigUint::from(3u32)), 40);
        assert_eq!(f.exponent(&BigUint::from(1_000_003u64)), 1);
        assert_eq!(f.value(), BigInt::from(n));
    }
}
