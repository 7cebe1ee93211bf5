//! Sharing a finite set counting multiplicity: `P(x) = u·P(y)` with `u` an
//! S-unit, its valuation-profile cross-check, and brute-force discovery of
//! shared pairs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::heightfn::{height, Magnitude};
use crate::polyring::RatPoly;
use crate::qsarith::rational::{abs_numer, denom};
use crate::qsarith::{canonical_cmp, is_s_integer, is_s_unit, s_decompose, Rational, SContext};

/// One candidate pair with its quotient certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharePoint {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str::option")]
    pub u: Option<Rational>,
    pub shares: bool,
}

/// A row of a pairs file: `{"x": "a/b", "y": "c/d"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInput {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
}

/// Quotient verdict from precomputed values `P(x)`, `P(y)`.
fn share_from_values(s: &SContext, px: &Rational, py: &Rational) -> (Option<Rational>, bool) {
    match (px.is_zero(), py.is_zero()) {
        (true, true) => (None, true),
        (false, true) => (None, false),
        (true, false) => (Some(Rational::zero()), false),
        (false, false) => {
            let u = px / py;
            let shares = is_s_unit(s, &u);
            (Some(u), shares)
        }
    }
}

/// Checks whether `x` and `y` share the zero set of `P`: both values vanish,
/// or `P(x)/P(y)` is an S-unit.
pub fn share_check(s: &SContext, p: &RatPoly, x: &Rational, y: &Rational) -> Result<SharePoint> {
    for v in [x, y] {
        if !is_s_integer(s, v) {
            return Err(Error::NotSInteger(v.clone()));
        }
    }
    let (u, shares) = share_from_values(s, &p.eval(x), &p.eval(y));
    Ok(SharePoint {
        x: x.clone(),
        y: y.clone(),
        u,
        shares,
    })
}

/// `ord_p(v)` for every prime `p ∉ S` dividing the numerator or denominator.
fn non_s_profile(s: &SContext, v: &Rational) -> Result<BTreeMap<BigUint, i64>> {
    let mut profile = BTreeMap::new();
    for (part, sign) in [(abs_numer(v), 1i64), (denom(v), -1i64)] {
        let dec = s_decompose(s, &part)?;
        for (p, e) in dec.non_s_factors.factors {
            *profile.entry(p).or_insert(0) += sign * e as i64;
        }
    }
    profile.retain(|_, e| *e != 0);
    Ok(profile)
}

/// True iff `ord_p P(x) = ord_p P(y)` for every prime outside S. Vanishing
/// values are an error; use [`share_check`]'s convention for them.
pub fn ord_profile_equal(s: &SContext, p: &RatPoly, x: &Rational, y: &Rational) -> Result<bool> {
    let (px, py) = (p.eval(x), p.eval(y));
    if px.is_zero() {
        return Err(Error::VanishingValue(x.clone()));
    }
    if py.is_zero() {
        return Err(Error::VanishingValue(y.clone()));
    }
    Ok(non_s_profile(s, &px)? == non_s_profile(s, &py)?)
}

/// Finite prefix of two sequences of S-integers, with sharing certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSequence {
    pub context: SContext,
    pub poly: RatPoly,
    pub rows: Vec<SharePoint>,
}

impl PairSequence {
    pub fn new(s: &SContext, p: &RatPoly, pairs: &[PairInput]) -> Result<Self> {
        let rows = pairs
            .iter()
            .map(|pr| share_check(s, p, &pr.x, &pr.y))
            .collect::<Result<Vec<_>>>()?;
        Ok(PairSequence {
            context: s.clone(),
            poly: p.clone(),
            rows,
        })
    }
}

/// Threshold statistics for a finite prefix; admissibility itself is
/// asymptotic and never decided here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    pub rows: usize,
    pub threshold: Magnitude,
    pub x_at_or_below: usize,
    pub y_at_or_below: usize,
    pub max_height_x: Option<Magnitude>,
    pub max_height_y: Option<Magnitude>,
    /// Rows after the last row whose `h(x)` is at or below the threshold.
    pub x_tail: usize,
    pub y_tail: usize,
    pub tail_nonempty: bool,
    /// False when no row's `h(x)` exceeds the first row's.
    pub height_grows: bool,
    pub note: String,
}

pub fn admissibility_report(seq: &PairSequence, threshold: &Magnitude) -> AdmissibilityReport {
    let hx: Vec<Magnitude> = seq.rows.iter().map(|r| height(&r.x)).collect();
    let hy: Vec<Magnitude> = seq.rows.iter().map(|r| height(&r.y)).collect();
    let stats = |hs: &[Magnitude]| {
        let below = hs.iter().filter(|h| *h <= threshold).count();
        let tail = match hs.iter().rposition(|h| h <= threshold) {
            Some(last) => hs.len() - last - 1,
            None => hs.len(),
        };
        (below, tail, hs.iter().max().cloned())
    };
    let (x_at_or_below, x_tail, max_height_x) = stats(&hx);
    let (y_at_or_below, y_tail, max_height_y) = stats(&hy);
    let height_grows = hx.first().is_some_and(|first| hx.iter().any(|h| h > first));
    let note = if seq.rows.is_empty() {
        "vacuous: empty sequence".to_string()
    } else if !height_grows {
        "not admissible at any threshold on this prefix".to_string()
    } else if x_tail == 0 {
        "no row beyond the last sub-threshold row".to_string()
    } else {
        format!("{x_tail} trailing rows exceed the threshold")
    };
    AdmissibilityReport {
        rows: seq.rows.len(),
        threshold: threshold.clone(),
        x_at_or_below,
        y_at_or_below,
        max_height_x,
        max_height_y,
        x_tail,
        y_tail,
        tail_nonempty: x_tail > 0,
        height_grows,
        note,
    }
}

/// Result of an enumeration that ran out of budget: rows `0..completed_rows`
/// of the outer loop were scanned completely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialSearch<T> {
    pub completed_rows: usize,
    pub total_rows: usize,
    pub found: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError<T: fmt::Debug> {
    #[error("enumeration budget exceeded after {} of {} rows", .0.completed_rows, .0.total_rows)]
    Budget(PartialSearch<T>),
    #[error(transparent)]
    Arith(#[from] Error),
}

/// The enumeration domain: S-integers `k/d` in lowest terms with
/// `max(|k|, d) ≤ height_bound` and `d = ∏_{p∈S} p^{e_p}`, `0 ≤ e_p ≤ exp_bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchBox {
    pub height_bound: u64,
    pub exp_bound: u32,
    /// Maximum number of `(x, y)` evaluations.
    pub max_pairs: u64,
}

pub const DEFAULT_MAX_PAIRS: u64 = 50_000_000;

impl SearchBox {
    pub fn integers(height_bound: u64) -> Self {
        SearchBox {
            height_bound,
            exp_bound: 0,
            max_pairs: DEFAULT_MAX_PAIRS,
        }
    }

    pub fn from_magnitude(bound: &Magnitude, exp_bound: u32) -> Result<Self> {
        let height_bound = bound
            .value()
            .to_u64()
            .ok_or_else(|| Error::Invalid("height bound too large to enumerate".into()))?;
        Ok(SearchBox {
            height_bound,
            exp_bound,
            max_pairs: DEFAULT_MAX_PAIRS,
        })
    }

    /// Candidates in canonical order.
    pub fn candidates(&self, s: &SContext) -> Vec<Rational> {
        let h = self.height_bound;
        let mut dens = vec![1u64];
        for &p in s.primes() {
            let mut next = Vec::new();
            for &d in &dens {
                let mut dd = d;
                for _ in 0..=self.exp_bound {
                    if dd > h {
                        break;
                    }
                    next.push(dd);
                    match dd.checked_mul(p) {
                        Some(v) => dd = v,
                        None => break,
                    }
                }
            }
            dens = next;
        }
        dens.sort_unstable();
        dens.dedup();
        let mut out = Vec::new();
        for &d in &dens {
            for k in -(h as i128)..=(h as i128) {
                if (k.unsigned_abs() as u64).gcd(&d) != 1 {
                    continue;
                }
                out.push(Rational::new(k.into(), d.into()));
            }
        }
        out.sort_by(canonical_cmp);
        out
    }
}

/// Generic off-diagonal double loop over the box with a pair predicate on
/// precomputed values. Rows are the `x` candidates.
pub(crate) fn scan_box<T, F>(
    s: &SContext,
    p: &RatPoly,
    search: &SearchBox,
    keep: F,
) -> std::result::Result<Vec<T>, SearchError<T>>
where
    T: Send + fmt::Debug,
    F: Fn(&Rational, &Rational, &Rational, &Rational) -> Option<T> + Sync,
{
    let cands = search.candidates(s);
    let values: Vec<Rational> = cands.par_iter().map(|c| p.eval(c)).collect();
    let n = cands.len();
    let allowed = if n == 0 {
        0
    } else {
        (search.max_pairs / n as u64).min(n as u64) as usize
    };
    let found: Vec<T> = (0..allowed)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (cands, values, keep) = (&cands, &values, &keep);
            (0..n)
                .filter(move |&j| j != i)
                .filter_map(move |j| keep(&cands[i], &cands[j], &values[i], &values[j]))
        })
        .collect();
    if allowed < n {
        return Err(SearchError::Budget(PartialSearch {
            completed_rows: allowed,
            total_rows: n,
            found,
        }));
    }
    Ok(found)
}

/// All sharing pairs `x ≠ y` in the box, sorted canonically by `(x, y)`.
pub fn search_shared_pairs(
    s: &SContext,
    p: &RatPoly,
    search: &SearchBox,
) -> std::result::Result<Vec<SharePoint>, SearchError<SharePoint>> {
    scan_box(s, p, search, |x, y, px, py| {
        let (u, shares) = share_from_values(s, px, py);
        shares.then(|| SharePoint {
            x: x.clone(),
            y: y.clone(),
            u,
            shares,
        })
    })
}

/// `u(y, x) = 1/u(x, y)` whenever both are defined.
pub fn inverse_quotient(point: &SharePoint) -> Option<Rational> {
    point
        .u
        .as_ref()
        .filter(|u| !u.is_zero())
        .map(|u| Rational::one() / u)
}
