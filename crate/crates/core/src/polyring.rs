//! Exact univariate polynomials over Q and the hypotheses of the trinomial
//! family `X^n + a·X^(n−m) + b`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsarith::rational::{abs_numer, denom, format_rational};
use crate::qsarith::{is_s_integer, is_s_unit, Rational, SContext};

/// Coefficients constant term first; never carries trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "PolyFile")]
pub struct RatPoly {
    #[serde(with = "crate::qsarith::rational::serde_str::vec")]
    coeffs: Vec<Rational>,
}

/// On-disk polynomial: `{"coeffs": ["c0", "c1", …]}`.
#[derive(Deserialize)]
struct PolyFile {
    #[serde(with = "crate::qsarith::rational::serde_str::vec")]
    coeffs: Vec<Rational>,
}

impl From<PolyFile> for RatPoly {
    fn from(f: PolyFile) -> Self {
        RatPoly::new(f.coeffs)
    }
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        RatPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        RatPoly::new(vec![c])
    }

    /// `X − root`.
    pub fn linear(root: &Rational) -> Self {
        RatPoly::new(vec![-root.clone(), Rational::one()])
    }

    /// `c·X^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        RatPoly::new(coeffs)
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        RatPoly::new(coeffs.iter().map(|&c| crate::qsarith::int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RatPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&lc.recip()),
            None => RatPoly::zero(),
        }
    }

    /// Euclidean division over Q.
    pub fn div_rem(&self, divisor: &RatPoly) -> Result<(RatPoly, RatPoly)> {
        let dd = divisor.degree().ok_or(Error::ZeroPolynomial)?;
        let lc = divisor.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let c = rem.last().expect("nonempty") / &lc;
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
            quot[k] = c;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        Ok((RatPoly::new(quot), RatPoly::new(rem)))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Lowest common denominator of the coefficients and the integer
    /// coefficients it produces.
    pub fn integral_form(&self) -> (num_bigint::BigUint, Vec<num_bigint::BigInt>) {
        let d = self
            .coeffs
            .iter()
            .fold(num_bigint::BigUint::one(), |acc, c| acc.lcm(&denom(c)));
        let dr = Rational::from_integer(d.clone().into());
        let ints = self.coeffs.iter().map(|c| (c * &dr).to_integer()).collect();
        (d, ints)
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        RatPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        self + &(-rhs)
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                if mag.is_integer() || k == 0 {
                    write!(f, "{}", format_rational(&mag))?;
                } else {
                    write!(f, "({})", format_rational(&mag))?;
                }
            }
            match k {
                0 => {}
                1 => write!(f, "X")?,
                _ => write!(f, "X^{k}")?,
            }
        }
        Ok(())
    }
}

/// `res(P, Q) = lc(P)^{deg Q} · ∏ Q(α)` over the roots `α` of `P`.
pub fn resultant(p: &RatPoly, q: &RatPoly) -> Result<Rational> {
    let dp = p.degree().ok_or(Error::ZeroPolynomial)?;
    let dq = q.degree().ok_or(Error::ZeroPolynomial)?;
    if dq == 0 {
        return Ok(num_traits::pow(q.coeffs[0].clone(), dp));
    }
    if dp == 0 {
        return Ok(num_traits::pow(p.coeffs[0].clone(), dq));
    }
    let r = p.div_rem(q)?.1;
    let Some(dr) = r.degree() else {
        return Ok(Rational::zero());
    };
    let lc = q.leading().expect("nonzero").clone();
    let mut out = num_traits::pow(lc, dp - dr) * resultant(q, &r)?;
    if (dp * dq) % 2 == 1 {
        out = -out;
    }
    Ok(out)
}

/// `disc(P) = (−1)^{n(n−1)/2} · res(P, P′) / lc(P)`.
pub fn discriminant(p: &RatPoly) -> Result<Rational> {
    let n = p.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let res = resultant(p, &p.derivative())?;
    let lc = p.leading().expect("nonzero");
    let d = res / lc;
    Ok(if (n * (n - 1) / 2) % 2 == 1 { -d } else { d })
}

/// `∏ (X − s)` over a set of distinct rationals.
pub fn build_from_roots(roots: &[Rational]) -> Result<RatPoly> {
    let mut seen = std::collections::BTreeSet::new();
    for r in roots {
        if !seen.insert(r.clone()) {
            return Err(Error::DuplicateRoot(r.clone()));
        }
    }
    Ok(roots
        .iter()
        .fold(RatPoly::one(), |acc, r| &acc * &RatPoly::linear(r)))
}

/// `X^n + a·X^(n−m) + b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YiFamily {
    pub n: u32,
    pub m: u32,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub a: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub b: Rational,
}

impl YiFamily {
    pub fn new(n: u32, m: u32, a: Rational, b: Rational) -> Result<Self> {
        if m == 0 || n <= m {
            return Err(Error::InvalidFamily(format!(
                "need n > m ≥ 1, got n={n}, m={m}"
            )));
        }
        Ok(YiFamily { n, m, a, b })
    }

    pub fn poly(&self) -> RatPoly {
        let mut p = RatPoly::monomial(Rational::one(), self.n as usize);
        p = &p + &RatPoly::monomial(self.a.clone(), (self.n - self.m) as usize);
        &p + &RatPoly::constant(self.b.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

/// One verdict per hypothesis of the family; `overall` is their conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub family: YiFamily,
    pub polynomial: String,
    pub s_primes: Vec<u64>,
    pub coprime: Verdict,
    pub degree_gap: Verdict,
    pub a_s_unit: Verdict,
    pub b_s_unit: Verdict,
    pub squarefree: Verdict,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub discriminant: Rational,
    pub roots_s_units: Verdict,
    pub overall: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("coprime", &self.coprime),
            ("degree_gap", &self.degree_gap),
            ("a_s_unit", &self.a_s_unit),
            ("b_s_unit", &self.b_s_unit),
            ("squarefree", &self.squarefree),
            ("roots_s_units", &self.roots_s_units),
        ]
        .into_iter()
        .filter(|(_, v)| !v.pass)
        .map(|(name, _)| name)
        .collect()
    }
}

const NEWTON_POLYGON_NOTE: &str =
    "P is monic with S-integral coefficients and S-unit constant term; \
at every prime p outside S the Newton polygon of P is a single segment of slope 0, so every root \
has valuation 0 at every place above p, i.e. every root is an S-unit";

pub fn yi_validate(s: &SContext, fam: &YiFamily) -> ValidationReport {
    let (n, m) = (fam.n, fam.m);
    let g = n.gcd(&m);
    let coprime = Verdict::new(g == 1, format!("gcd({n}, {m}) = {g}"));
    let degree_gap = Verdict::new(n > 2 * m + 4, format!("n = {n}, 2m + 4 = {}", 2 * m + 4));
    let unit_verdict = |name: &str, x: &Rational| {
        Verdict::new(
            is_s_unit(s, x),
            format!(
                "{name} = {} is {}an S-unit",
                format_rational(x),
                if is_s_unit(s, x) { "" } else { "not " }
            ),
        )
    };
    let a_s_unit = unit_verdict("a", &fam.a);
    let b_s_unit = unit_verdict("b", &fam.b);
    let p = fam.poly();
    let disc = discriminant(&p).expect("degree n ≥ 2");
    let squarefree = Verdict::new(
        !disc.is_zero(),
        if disc.is_zero() {
            "discriminant vanishes: P has a repeated root".to_string()
        } else {
            format!(
                "discriminant is nonzero ({} digits)",
                abs_numer(&disc).to_string().len()
            )
        },
    );
    let roots_ok =
        p.is_monic() && p.coeffs().iter().all(|c| is_s_integer(s, c)) && is_s_unit(s, &fam.b);
    let roots_s_units = Verdict::new(
        roots_ok,
        if roots_ok {
            NEWTON_POLYGON_NOTE.to_string()
        } else {
            "criterion not met: needs S-integral coefficients and an S-unit constant term"
                .to_string()
        },
    );
    let overall = [
        &coprime,
        &degree_gap,
        &a_s_unit,
        &b_s_unit,
        &squarefree,
        &roots_s_units,
    ]
    .iter()
    .all(|v| v.pass);
    ValidationReport {
        family: fam.clone(),
        polynomial: p.to_string(),
        s_primes: s.primes().to_vec(),
        coprime,
        degree_gap,
        a_s_unit,
        b_s_unit,
        squarefree,
        discriminant: disc,
        roots_s_units,
        overall,
    }
}
