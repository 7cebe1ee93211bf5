//! Heights, counting functions and exact comparison of log quantities.
//!
//! A [`Magnitude`] `M` stands for the real number `log M`; sums of logs are
//! products of magnitudes, and comparisons with rational weights reduce to
//! comparisons of integer powers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qsarith::rational::{abs_numer, biguint_pow, denom};
use crate::qsarith::{s_decompose, Rational, SContext};

/// Digits after the decimal point in rendered log values.
pub const DISPLAY_DIGITS: usize = 6;

/// A positive integer `M`, read as the log quantity `log M`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Magnitude(BigUint);

impl Magnitude {
    pub fn new(value: BigUint) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::Invalid("magnitude must be at least 1".into()));
        }
        Ok(Magnitude(value))
    }

    pub fn from_u64(value: u64) -> Self {
        Magnitude::new(BigUint::from(value)).expect("nonzero magnitude")
    }

    /// The zero quantity `log 1`.
    pub fn zero() -> Self {
        Magnitude(BigUint::one())
    }

    pub fn is_zero_quantity(&self) -> bool {
        self.0.is_one()
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn pow(&self, e: u32) -> Self {
        Magnitude(biguint_pow(&self.0, e))
    }

    pub fn divides(&self, other: &Magnitude) -> bool {
        (&other.0 % &self.0).is_zero()
    }

    /// Approximate `log M`; display only.
    pub fn approx_log(&self) -> f64 {
        approx_ln(&self.0)
    }
}

impl Mul for Magnitude {
    type Output = Magnitude;
    fn mul(self, rhs: Magnitude) -> Magnitude {
        Magnitude(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a Magnitude> for &'a Magnitude {
    type Output = Magnitude;
    fn mul(self, rhs: &Magnitude) -> Magnitude {
        Magnitude(&self.0 * &rhs.0)
    }
}

impl std::iter::Product for Magnitude {
    fn product<I: Iterator<Item = Magnitude>>(iter: I) -> Self {
        iter.fold(Magnitude::zero(), |a, b| a * b)
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log {}", self.0)
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Magnitude", 2)?;
        st.serialize_field("exact", &self.0.to_string())?;
        st.serialize_field("approx", &display_log(self, DISPLAY_DIGITS))?;
        st.end()
    }
}

pub(crate) fn ser_biguint<S: Serializer>(
    n: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

fn approx_ln(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map(f64::ln).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Decimal approximation of `log m` with `digits` places. Display only:
/// verdicts never depend on this value.
pub fn display_log(m: &Magnitude, digits: usize) -> String {
    format!("{:.*}", digits.max(1), m.approx_log())
}

/// `h(a/b) = log max(|a|, b)` in lowest terms.
pub fn height(x: &Rational) -> Magnitude {
    Magnitude(abs_numer(x).max(denom(x)))
}

/// `N(x) = Σ_{p∉S} max{0, ord_p x} log p`: the non-S part of the numerator.
pub fn counting(s: &SContext, x: &Rational) -> Result<Magnitude> {
    if x.is_zero() {
        return Err(Error::CountingAtZero);
    }
    let dec = s_decompose(s, &abs_numer(x))?;
    Ok(Magnitude(dec.non_s_part))
}

/// `N^(ℓ)(x)`: as [`counting`] with every multiplicity capped at `ℓ`.
pub fn counting_trunc(s: &SContext, level: u32, x: &Rational) -> Result<Magnitude> {
    if level == 0 {
        return Err(Error::ZeroTruncation);
    }
    if x.is_zero() {
        return Err(Error::CountingAtZero);
    }
    let dec = s_decompose(s, &abs_numer(x))?;
    Ok(dec
        .non_s_factors
        .factors
        .iter()
        .map(|(p, &e)| Magnitude(biguint_pow(p, e.min(level))))
        .product())
}

/// `coefficient · log(base)` with a nonnegative rational coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScaledLog {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub coefficient: Rational,
    pub base: Magnitude,
}

impl ScaledLog {
    pub fn new(coefficient: Rational, base: Magnitude) -> Result<Self> {
        if coefficient.is_negative() {
            return Err(Error::Invalid(format!(
                "scaled log coefficient {coefficient} is negative"
            )));
        }
        Ok(ScaledLog { coefficient, base })
    }

    pub fn unit(base: Magnitude) -> Self {
        ScaledLog {
            coefficient: Rational::one(),
            base,
        }
    }

    pub fn approx(&self) -> f64 {
        self.coefficient.to_f64().unwrap_or(f64::NAN) * self.base.approx_log()
    }
}

/// Exact ordering of `a·log A` against `b·log B`.
pub fn cmp_scaled(lhs: &ScaledLog, rhs: &ScaledLog) -> Ordering {
    LogSum::from(lhs.clone()).cmp_exact(&LogSum::from(rhs.clone()))
}

/// A finite sum `Σ cᵢ·log Mᵢ` with nonnegative rational weights.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct LogSum {
    terms: Vec<ScaledLog>,
}

impl From<ScaledLog> for LogSum {
    fn from(t: ScaledLog) -> Self {
        LogSum { terms: vec![t] }
    }
}

impl From<Magnitude> for LogSum {
    fn from(m: Magnitude) -> Self {
        LogSum::from(ScaledLog::unit(m))
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum::default()
    }

    /// Adds `coefficient · log base`; panics on a negative coefficient.
    pub fn plus(mut self, coefficient: Rational, base: &Magnitude) -> Self {
        assert!(!coefficient.is_negative(), "negative weight in LogSum");
        self.terms.push(ScaledLog {
            coefficient,
            base: base.clone(),
        });
        self
    }

    pub fn plus_log(self, base: &Magnitude) -> Self {
        self.plus(Rational::one(), base)
    }

    pub fn plus_sum(mut self, other: &LogSum) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scaled(mut self, factor: &Rational) -> Self {
        assert!(!factor.is_negative(), "negative scale in LogSum");
        for t in &mut self.terms {
            t.coefficient = &t.coefficient * factor;
        }
        self
    }

    pub fn terms(&self) -> &[ScaledLog] {
        &self.terms
    }

    pub fn approx(&self) -> f64 {
        self.terms.iter().map(ScaledLog::approx).sum()
    }

    pub fn display(&self, digits: usize) -> String {
        format!("{:.*}", digits.max(1), self.approx())
    }

    /// Exact ordering. Every weight is brought to a common denominator `d`
    /// and the comparison becomes `∏ Aᵢ^{aᵢd}` against `∏ Bⱼ^{bⱼd}`.
    pub fn cmp_exact(&self, other: &LogSum) -> Ordering {
        let live = |s: &LogSum| -> Vec<ScaledLog> {
            s.terms
                .iter()
                .filter(|t| !t.coefficient.is_zero() && !t.base.is_zero_quantity())
                .cloned()
                .collect()
        };
        let (lhs, rhs) = (live(self), live(other));
        match (lhs.is_empty(), rhs.is_empty()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let d = lhs
            .iter()
            .chain(&rhs)
            .fold(BigUint::one(), |acc, t| acc.lcm(&denom(&t.coefficient)));
        let exps = |ts: &[ScaledLog]| -> Vec<BigUint> {
            ts.iter()
                .map(|t| {
                    let scaled = &t.coefficient * Rational::from_integer(d.clone().into());
                    debug_assert!(scaled.is_integer());
                    abs_numer(&scaled)
                })
                .collect()
        };
        let (le, re) = (exps(&lhs), exps(&rhs));
        let g = le
            .iter()
            .chain(&re)
            .fold(BigUint::zero(), |acc, e| acc.gcd(e));
        let power = |ts: &[ScaledLog], es: &[BigUint]| -> BigUint {
            ts.iter()
                .zip(es)
                .map(|(t, e)| {
                    let e = (e / &g).to_u32().expect("exponent fits in u32");
                    biguint_pow(t.base.value(), e)
                })
                .product()
        };
        power(&lhs, &le).cmp(&power(&rhs, &re))
    }

    pub fn at_most(&self, other: &LogSum) -> bool {
        self.cmp_exact(other) != Ordering::Greater
    }
}
