//! Evaluator for the truncated subspace inequality
//! `(q − r − 1 − ε)·max h(xᵢ) ≤ Σ N^(r)(Lᵢ(x))` on concrete points, and its
//! two-variable corollary for `Ax + By = C`.
//!
//! The inequality is asymptotic; single-point verdicts are evidence only.

use std::cmp::Ordering;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heightfn::{cmp_scaled, counting_trunc, height, Magnitude, ScaledLog};
use crate::qsarith::rational::{abs_numer, denom, format_rational};
use crate::qsarith::{is_s_integer, Rational, SContext};
use crate::sharing::PairInput;

/// `q` linear forms in `r + 1` variables, each row a coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FormsFile")]
pub struct LinearFormSystem {
    pub r: usize,
    #[serde(serialize_with = "ser_matrix")]
    pub forms: Vec<Vec<Rational>>,
}

#[derive(Deserialize)]
struct FormsFile {
    r: usize,
    forms: Vec<Vec<String>>,
}

impl TryFrom<FormsFile> for LinearFormSystem {
    type Error = Error;
    fn try_from(f: FormsFile) -> Result<Self> {
        let forms = f
            .forms
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| crate::qsarith::parse_rational(c))
                    .collect()
            })
            .collect::<Result<Vec<Vec<Rational>>>>()?;
        LinearFormSystem::new(f.r, forms)
    }
}

fn ser_matrix<S: serde::Serializer>(
    m: &[Vec<Rational>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = m
        .iter()
        .map(|row| row.iter().map(format_rational).collect())
        .collect();
    strings.serialize(s)
}

impl LinearFormSystem {
    pub fn new(r: usize, forms: Vec<Vec<Rational>>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidSystem("r must be at least 1".into()));
        }
        if let Some(bad) = forms.iter().position(|f| f.len() != r + 1) {
            return Err(Error::InvalidSystem(format!(
                "form {bad} has {} coefficients, expected {}",
                forms[bad].len(),
                r + 1
            )));
        }
        if forms.len() < r + 1 {
            return Err(Error::InvalidSystem(format!(
                "need at least r + 1 = {} forms, got {}",
                r + 1,
                forms.len()
            )));
        }
        Ok(LinearFormSystem { r, forms })
    }

    pub fn from_i64s(r: usize, forms: &[&[i64]]) -> Result<Self> {
        Self::new(
            r,
            forms
                .iter()
                .map(|f| f.iter().map(|&c| crate::qsarith::int(c)).collect())
                .collect(),
        )
    }

    pub fn q(&self) -> usize {
        self.forms.len()
    }

    pub fn apply(&self, i: usize, point: &[Rational]) -> Rational {
        self.forms[i]
            .iter()
            .zip(point)
            .fold(Rational::zero(), |acc, (c, x)| acc + c * x)
    }
}

/// Determinant by Gaussian elimination over Q.
pub fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        let pivot_row = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] / &p;
            for (c, pc) in row.iter_mut().zip(&pivot_row).skip(col) {
                *c -= &f * pc;
            }
        }
    }
    det
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralPosition {
    pub in_general_position: bool,
    /// First `(r + 1)`-subset (in lexicographic order) with vanishing determinant.
    pub witness: Option<Vec<usize>>,
}

pub fn general_position_check(sys: &LinearFormSystem) -> GeneralPosition {
    let witness = (0..sys.q()).combinations(sys.r + 1).find(|idx| {
        let minor: Vec<Vec<Rational>> = idx.iter().map(|&i| sys.forms[i].clone()).collect();
        determinant(&minor).is_zero()
    });
    GeneralPosition {
        in_general_position: witness.is_none(),
        witness,
    }
}

/// A primitive projective point: integer coordinates, not all zero, with
/// gcd 1 and first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjPoint {
    #[serde(with = "crate::qsarith::rational::serde_str::vec")]
    pub coords: Vec<Rational>,
}

/// Scales a nonzero tuple to its primitive integral representative. This
/// clears non-S denominators and divides out the non-S content, and it also
/// fixes the S-unit scaling freedom so that verdicts do not depend on it.
pub fn normalize_point(_s: &SContext, coords: &[Rational]) -> Result<ProjPoint> {
    if coords.iter().all(Zero::is_zero) {
        return Err(Error::ZeroPoint);
    }
    let l = coords
        .iter()
        .fold(BigUint::one(), |acc, c| acc.lcm(&denom(c)));
    let lr = Rational::from_integer(BigInt::from(l));
    let scaled: Vec<Rational> = coords.iter().map(|c| c * &lr).collect();
    let g = scaled
        .iter()
        .fold(BigUint::zero(), |acc, c| acc.gcd(&abs_numer(c)));
    let mut gr = Rational::from_integer(BigInt::from(g));
    if scaled
        .iter()
        .find(|c| !c.is_zero())
        .is_some_and(Signed::is_negative)
    {
        gr = -gr;
    }
    Ok(ProjPoint {
        coords: scaled.iter().map(|c| c / &gr).collect(),
    })
}

/// Primitivity outside S: S-integral coordinates whose non-S contents are coprime.
pub fn is_primitive_outside_s(s: &SContext, coords: &[Rational]) -> bool {
    if coords.iter().all(Zero::is_zero) || !coords.iter().all(|c| is_s_integer(s, c)) {
        return false;
    }
    let g = coords
        .iter()
        .fold(BigUint::zero(), |acc, c| acc.gcd(&abs_numer(c)));
    s.split(&g).1.is_one()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointMode {
    /// Replace each point by its primitive representative.
    #[default]
    Normalize,
    /// Use points as given; error unless primitive outside S.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointVerdict {
    Holds,
    Violated,
    Skipped,
}

/// Every quantity of the inequality at one point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectReport {
    #[serde(with = "crate::qsarith::rational::serde_str::vec")]
    pub point: Vec<Rational>,
    pub coordinate_heights: Vec<Magnitude>,
    pub max_height: Magnitude,
    #[serde(with = "crate::qsarith::rational::serde_str::vec")]
    pub form_values: Vec<Rational>,
    pub truncation: u32,
    pub truncated_counts: Vec<Option<Magnitude>>,
    pub rhs: Option<Magnitude>,
    /// `q − r − 1 − ε`; may be negative.
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub lhs_coefficient: Rational,
    pub verdict: PointVerdict,
    pub skip_reason: Option<String>,
}

/// `LHS ≤ RHS` decided exactly; a nonpositive coefficient always holds.
pub(crate) fn verdict_for(
    coefficient: &Rational,
    base: &Magnitude,
    rhs: &Magnitude,
) -> PointVerdict {
    if !coefficient.is_positive() {
        return PointVerdict::Holds;
    }
    let lhs = ScaledLog::new(coefficient.clone(), base.clone()).expect("positive");
    match cmp_scaled(&lhs, &ScaledLog::unit(rhs.clone())) {
        Ordering::Greater => PointVerdict::Violated,
        _ => PointVerdict::Holds,
    }
}

fn evaluate_point(
    s: &SContext,
    sys: &LinearFormSystem,
    coefficient: &Rational,
    point: &[Rational],
) -> Result<DefectReport> {
    let coordinate_heights: Vec<Magnitude> = point.iter().map(height).collect();
    let max_height = coordinate_heights
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(Magnitude::zero);
    let form_values: Vec<Rational> = (0..sys.q()).map(|i| sys.apply(i, point)).collect();
    let level = sys.r as u32;
    let vanishing: Vec<usize> = form_values.iter().positions(Zero::is_zero).collect();
    let truncated_counts = form_values
        .iter()
        .map(|v| {
            if v.is_zero() {
                Ok(None)
            } else {
                counting_trunc(s, level, v).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (rhs, verdict, skip_reason) = if vanishing.is_empty() {
        let rhs: Magnitude = truncated_counts.iter().flatten().cloned().product();
        let v = verdict_for(coefficient, &max_height, &rhs);
        (Some(rhs), v, None)
    } else {
        (
            None,
            PointVerdict::Skipped,
            Some(format!("form vanishes: L{:?}", vanishing)),
        )
    };
    Ok(DefectReport {
        point: point.to_vec(),
        coordinate_heights,
        max_height,
        form_values,
        truncation: level,
        truncated_counts,
        rhs,
        lhs_coefficient: coefficient.clone(),
        verdict,
        skip_reason,
    })
}

/// Per-point verdicts for the truncated subspace inequality, in input order.
pub fn evaluate_conjecture(
    s: &SContext,
    sys: &LinearFormSystem,
    epsilon: &Rational,
    points: &[Vec<Rational>],
    mode: PointMode,
) -> Result<Vec<DefectReport>> {
    if epsilon.is_negative() {
        return Err(Error::Invalid("epsilon must be nonnegative".into()));
    }
    let gp = general_position_check(sys);
    if let Some(witness) = gp.witness {
        return Err(Error::NotGeneralPosition { witness });
    }
    let q = sys.q() as i64;
    let r = sys.r as i64;
    let coefficient = Rational::from_integer((q - r - 1).into()) - epsilon;
    points
        .par_iter()
        .map(|pt| {
            if pt.len() != sys.r + 1 {
                return Err(Error::InvalidSystem(format!(
                    "point has {} coordinates, expected {}",
                    pt.len(),
                    sys.r + 1
                )));
            }
            let coords = match mode {
                PointMode::Normalize => normalize_point(s, pt)?.coords,
                PointMode::Strict => {
                    if !is_primitive_outside_s(s, pt) {
                        return Err(Error::NotPrimitive(
                            pt.iter().map(format_rational).join(", "),
                        ));
                    }
                    pt.clone()
                }
            };
            evaluate_point(s, sys, &coefficient, &coords)
        })
        .collect()
}

/// Summary statistics over a batch of defect reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectSummary {
    pub points: usize,
    pub holds: usize,
    pub violated: usize,
    pub skipped: usize,
    pub max_violating_height: Option<Magnitude>,
}

pub fn summarize(reports: &[DefectReport]) -> DefectSummary {
    let count = |v: PointVerdict| reports.iter().filter(|r| r.verdict == v).count();
    DefectSummary {
        points: reports.len(),
        holds: count(PointVerdict::Holds),
        violated: count(PointVerdict::Violated),
        skipped: count(PointVerdict::Skipped),
        max_violating_height: reports
            .iter()
            .filter(|r| r.verdict == PointVerdict::Violated)
            .map(|r| r.max_height.clone())
            .max(),
    }
}

/// The corollary's own form `(1 − ε)h(x) ≤ N^(1)(x) + N^(1)(y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectCorollary {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub lhs_coefficient: Rational,
    pub height_x: Magnitude,
    pub n1_x: Option<Magnitude>,
    pub n1_y: Option<Magnitude>,
    pub rhs: Option<Magnitude>,
    pub verdict: PointVerdict,
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorollaryRow {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
    pub delegated: Option<DefectReport>,
    pub direct: Option<DirectCorollary>,
    /// Both routes give the same verdict, RHS and height.
    pub agree: bool,
    pub error: Option<String>,
}

/// The system `{x0, x1, C·x0 − A·x1}` used for the corollary.
pub fn corollary_system(a: &Rational, c: &Rational) -> Result<LinearFormSystem> {
    LinearFormSystem::new(
        1,
        vec![
            vec![Rational::one(), Rational::zero()],
            vec![Rational::zero(), Rational::one()],
            vec![c.clone(), -a.clone()],
        ],
    )
}

fn direct_corollary(
    s: &SContext,
    epsilon: &Rational,
    x: &Rational,
    y: &Rational,
) -> Result<DirectCorollary> {
    let lhs_coefficient = Rational::one() - epsilon;
    let height_x = height(x);
    let n1 = |v: &Rational| -> Result<Option<Magnitude>> {
        if v.is_zero() {
            Ok(None)
        } else {
            counting_trunc(s, 1, v).map(Some)
        }
    };
    let (n1_x, n1_y) = (n1(x)?, n1(y)?);
    let (rhs, verdict, skip_reason) = match (&n1_x, &n1_y) {
        (Some(a), Some(b)) => {
            let rhs = a * b;
            let v = verdict_for(&lhs_coefficient, &height_x, &rhs);
            (Some(rhs), v, None)
        }
        _ => (
            None,
            PointVerdict::Skipped,
            Some("x or y vanishes".to_string()),
        ),
    };
    Ok(DirectCorollary {
        lhs_coefficient,
        height_x,
        n1_x,
        n1_y,
        rhs,
        verdict,
        skip_reason,
    })
}

/// Evaluates the corollary row by row, both directly and by delegation to
/// [`evaluate_conjecture`] with `r = 1`, point `(1, x)` and forms
/// `x0, x1, C·x0 − A·x1`.
pub fn corollary_eval(
    s: &SContext,
    a: &Rational,
    b: &Rational,
    c: &Rational,
    epsilon: &Rational,
    pairs: &[PairInput],
) -> Result<Vec<CorollaryRow>> {
    if a.is_zero() || b.is_zero() || c.is_zero() {
        return Err(Error::Invalid("A, B and C must be nonzero".into()));
    }
    let sys = corollary_system(a, c)?;
    pairs
        .par_iter()
        .map(|pr| {
            let (x, y) = (&pr.x, &pr.y);
            let mut row = CorollaryRow {
                x: x.clone(),
                y: y.clone(),
                delegated: None,
                direct: None,
                agree: false,
                error: None,
            };
            if a * x + b * y != *c {
                row.error = Some(format!(
                    "A·x + B·y = {} ≠ C = {}",
                    format_rational(&(a * x + b * y)),
                    format_rational(c)
                ));
                return Ok(row);
            }
            let point = vec![Rational::one(), x.clone()];
            let delegated = evaluate_conjecture(s, &sys, epsilon, &[point], PointMode::Normalize)?
                .pop()
                .expect("one point");
            let direct = direct_corollary(s, epsilon, x, y)?;
            row.agree = delegated.verdict == direct.verdict
                && delegated.rhs == direct.rhs
                && (delegated.verdict == PointVerdict::Skipped
                    || delegated.max_height == direct.height_x);
            row.delegated = Some(delegated);
            row.direct = Some(direct);
            Ok(row)
        })
        .collect()
}
