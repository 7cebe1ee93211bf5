//! Step-by-step verification of the unique-range-set argument for the
//! trinomial family on concrete shared pairs.
//!
//! For a pair with `P(x) = u·P(y)` the auxiliary values
//! `η = −(1/b)·x^(n−m)·(x^m + a)` and `ζ = (1/b)·y^(n−m)·(y^m + a)·u`
//! satisfy `η + u + ζ = 1`. Every displayed bound of the argument is checked
//! exactly with explicit constants in place of `O(1)`. The single conjectural
//! step is reported as evidence, never as a failure.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heightfn::{counting, counting_trunc, height, LogSum, Magnitude, DISPLAY_DIGITS};
use crate::polyring::{yi_validate, RatPoly, ValidationReport, YiFamily};
use crate::qsarith::rational::{abs_numer, denom, format_rational, pow};
use crate::qsarith::{is_s_unit, ord, unit_equation_solutions, Rational, SContext, UnitPair};
use crate::sharing::{scan_box, PairInput, SearchBox, SearchError};
use crate::subspace::PointVerdict;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `(η, ζ)` for a row `(x, y, u)`.
pub fn aux_build(
    fam: &YiFamily,
    x: &Rational,
    y: &Rational,
    u: &Rational,
) -> Result<(Rational, Rational)> {
    if fam.b.is_zero() {
        return Err(Error::InvalidFamily("b must be nonzero".into()));
    }
    let k = fam.n - fam.m;
    let shifted = |t: &Rational| pow(t, k) * (pow(t, fam.m) + &fam.a);
    let eta = -shifted(x) / &fam.b;
    let zeta = shifted(y) * u / &fam.b;
    Ok((eta, zeta))
}

/// Whether `η + u + ζ = 1` exactly.
pub fn identity_check(fam: &YiFamily, x: &Rational, y: &Rational, u: &Rational) -> Result<bool> {
    let (eta, zeta) = aux_build(fam, x, y, u)?;
    Ok(eta + u + zeta == Rational::one())
}

/// Explicit constants standing in for the `O(1)` terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyConstants {
    /// `1 + Σ|D·cᵢ|`, `D` the common denominator of the coefficients:
    /// `N(P(x)) ≤ n·h(x) + log C_P` and `h(P(x)) ≤ n·h(x) + log C_P`.
    pub c_p: Magnitude,
    /// `den(a) + |num(a)|`: `N(x^m + a) ≤ m·h(x) + log C_a`.
    pub c_a: Magnitude,
    /// `2·H(b)` and `A* = max(den(a), 2|num(a)|)`:
    /// `n·h(x) ≤ h(η) + log(2H(b)) + (n/m)·log A*`.
    pub c_eta_base: Magnitude,
    pub a_star: Magnitude,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub a_star_weight: Rational,
}

impl FamilyConstants {
    pub fn new(fam: &YiFamily) -> Self {
        FamilyConstants {
            c_p: poly_constant(&fam.poly()),
            c_a: Magnitude::new(denom(&fam.a) + abs_numer(&fam.a)).expect("positive"),
            c_eta_base: Magnitude::new(height(&fam.b).value() * 2u32).expect("positive"),
            a_star: Magnitude::new(denom(&fam.a).max(abs_numer(&fam.a) * 2u32)).expect("positive"),
            a_star_weight: Rational::new((fam.n as i64).into(), (fam.m as i64).into()),
        }
    }

    /// `log C_η = log(2H(b)) + (n/m)·log A*`.
    pub fn log_c_eta(&self) -> LogSum {
        LogSum::from(self.c_eta_base.clone()).plus(self.a_star_weight.clone(), &self.a_star)
    }

    /// `2·log C_a + log C_η`, the constant of one direction of the chain.
    pub fn log_c_direction(&self) -> LogSum {
        LogSum::new()
            .plus(q(2), &self.c_a)
            .plus_sum(&self.log_c_eta())
    }

    pub fn log_c_total(&self) -> LogSum {
        self.log_c_direction().scaled(&q(2))
    }
}

/// `1 + Σ|D·cᵢ|` for the integral form `D·P`.
pub fn poly_constant(p: &RatPoly) -> Magnitude {
    let (_, ints) = p.integral_form();
    let sum: BigUint = ints.iter().map(|c| c.magnitude().clone()).sum();
    Magnitude::new(sum + 1u32).expect("positive")
}

fn n_opt(s: &SContext, level: Option<u32>, v: &Rational) -> Result<Option<Magnitude>> {
    if v.is_zero() {
        return Ok(None);
    }
    match level {
        Some(l) => counting_trunc(s, l, v).map(Some),
        None => counting(s, v).map(Some),
    }
}

/// All quantities of one shared pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub u: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub eta: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub zeta: Rational,
    pub h_x: Magnitude,
    pub h_y: Magnitude,
    pub h_u: Magnitude,
    pub h_eta: Magnitude,
    pub h_zeta: Magnitude,
    pub n1_x: Option<Magnitude>,
    pub n1_y: Option<Magnitude>,
    pub n2_eta: Option<Magnitude>,
    pub n2_zeta: Option<Magnitude>,
    pub n_xm_a: Option<Magnitude>,
    pub n_ym_a: Option<Magnitude>,
    pub identity_ok: bool,
    /// `u` is an S-unit.
    pub shares: bool,
    /// Set when `η = 0` or `ζ = 0`; such rows skip the counting checks.
    pub degenerate: Option<String>,
}

impl TraceRow {
    pub fn triple(&self) -> [Rational; 3] {
        [self.eta.clone(), self.u.clone(), self.zeta.clone()]
    }
}

/// Builds the row for `(x, y)` with `u = P(x)/P(y)`.
pub fn trace_row(s: &SContext, fam: &YiFamily, x: &Rational, y: &Rational) -> Result<TraceRow> {
    let p = fam.poly();
    let py = p.eval(y);
    if py.is_zero() {
        return Err(Error::VanishingValue(y.clone()));
    }
    let u = p.eval(x) / &py;
    let (eta, zeta) = aux_build(fam, x, y, &u)?;
    let shifted = |t: &Rational| pow(t, fam.m) + &fam.a;
    let degenerate = match (eta.is_zero(), zeta.is_zero()) {
        (false, false) => None,
        (true, false) => Some("eta vanishes".to_string()),
        (false, true) => Some("zeta vanishes".to_string()),
        (true, true) => Some("eta and zeta vanish".to_string()),
    };
    Ok(TraceRow {
        h_x: height(x),
        h_y: height(y),
        h_u: height(&u),
        h_eta: height(&eta),
        h_zeta: height(&zeta),
        n1_x: n_opt(s, Some(1), x)?,
        n1_y: n_opt(s, Some(1), y)?,
        n2_eta: n_opt(s, Some(2), &eta)?,
        n2_zeta: n_opt(s, Some(2), &zeta)?,
        n_xm_a: n_opt(s, None, &shifted(x))?,
        n_ym_a: n_opt(s, None, &shifted(y))?,
        identity_ok: &eta + &u + &zeta == Rational::one(),
        shares: is_s_unit(s, &u),
        degenerate,
        x: x.clone(),
        y: y.clone(),
        u,
        eta,
        zeta,
    })
}

/// Comparability check through the counting function of `P`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RothRow {
    pub counting_px: Option<Magnitude>,
    pub counting_py: Option<Magnitude>,
    /// `N(P(x)) = N(P(y))` exactly.
    pub kernel_equal: bool,
    /// `N(P(x)) ≤ n·h(x) + log C_P`.
    pub upper_bound_ok: bool,
    /// `h(x)/h(y)`, display only.
    pub height_ratio: Option<String>,
    pub error: Option<String>,
}

pub fn roth_chain_report(s: &SContext, p: &RatPoly, rows: &[TraceRow]) -> Result<Vec<RothRow>> {
    let n = p.degree().ok_or(Error::ZeroPolynomial)? as u32;
    let c_p = poly_constant(p);
    rows.par_iter()
        .map(|row| {
            let (px, py) = (p.eval(&row.x), p.eval(&row.y));
            let ratio = (!row.h_y.is_zero_quantity()).then(|| {
                format!(
                    "{:.*}",
                    DISPLAY_DIGITS,
                    row.h_x.approx_log() / row.h_y.approx_log()
                )
            });
            if px.is_zero() || py.is_zero() {
                return Ok(RothRow {
                    counting_px: None,
                    counting_py: None,
                    kernel_equal: false,
                    upper_bound_ok: false,
                    height_ratio: ratio,
                    error: Some("polynomial value vanishes".into()),
                });
            }
            let (cx, cy) = (counting(s, &px)?, counting(s, &py)?);
            let bound = &row.h_x.pow(n) * &c_p;
            Ok(RothRow {
                kernel_equal: cx == cy,
                upper_bound_ok: cx <= bound,
                counting_px: Some(cx),
                counting_py: Some(cy),
                height_ratio: ratio,
                error: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitHeightRow {
    pub h_u: Magnitude,
    pub h_px: Magnitude,
    pub h_py: Magnitude,
    /// `h(u) ≤ h(P(x)) + h(P(y))`.
    pub ok: bool,
}

pub fn unit_height_check(p: &RatPoly, rows: &[TraceRow]) -> Vec<UnitHeightRow> {
    rows.iter()
        .map(|row| {
            let (h_px, h_py) = (height(&p.eval(&row.x)), height(&p.eval(&row.y)));
            UnitHeightRow {
                ok: row.h_u <= &h_px * &h_py,
                h_u: row.h_u.clone(),
                h_px,
                h_py,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruncRow {
    pub checked: bool,
    pub reason: Option<String>,
    /// `N^(2)(η) ≤ 2N^(1)(x) + N(x^m + a)`.
    pub eta_bound_ok: bool,
    /// `N^(2)(ζ) ≤ 2N^(1)(y) + N(y^m + a)`.
    pub zeta_bound_ok: bool,
    /// `N^(2)(u) = 0`.
    pub n2_u_zero: bool,
    /// `N^(2)(η + u + ζ) = 0`.
    pub n2_sum_zero: bool,
}

impl TruncRow {
    pub fn ok(&self) -> bool {
        !self.checked
            || (self.eta_bound_ok && self.zeta_bound_ok && self.n2_u_zero && self.n2_sum_zero)
    }
}

pub fn trunc_bound_check(s: &SContext, rows: &[TraceRow]) -> Result<Vec<TruncRow>> {
    rows.iter()
        .map(|row| {
            if let Some(reason) = &row.degenerate {
                return Ok(TruncRow {
                    checked: false,
                    reason: Some(reason.clone()),
                    eta_bound_ok: false,
                    zeta_bound_ok: false,
                    n2_u_zero: false,
                    n2_sum_zero: false,
                });
            }
            let bound = |n1: &Option<Magnitude>,
                         shifted: &Option<Magnitude>,
                         n2: &Option<Magnitude>| {
                match (n1, shifted, n2) {
                    (Some(n1), Some(sh), Some(n2)) => *n2 <= &n1.pow(2) * sh,
                    _ => false,
                }
            };
            Ok(TruncRow {
                checked: true,
                reason: None,
                eta_bound_ok: bound(&row.n1_x, &row.n_xm_a, &row.n2_eta),
                zeta_bound_ok: bound(&row.n1_y, &row.n_ym_a, &row.n2_zeta),
                n2_u_zero: counting_trunc(s, 2, &row.u)?.is_zero_quantity(),
                n2_sum_zero: counting_trunc(s, 2, &(&row.eta + &row.u + &row.zeta))?
                    .is_zero_quantity(),
            })
        })
        .collect()
}

/// One direction of the chain: `X` is `x` (or `y` for the reversed row).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectionReport {
    /// `(1 − ε/n)·max{h(η), h(u), h(ζ)} ≤ Σ N^(2)` (conjectural step; evidence).
    pub conjectural_step: PointVerdict,
    pub max_aux_height: Magnitude,
    pub n2_sum: Magnitude,
    /// `N^(1)(X) ≤ h(X)`.
    pub counting_le_height: bool,
    /// `N(X^m + a) ≤ m·h(X) + log C_a`.
    pub shifted_bound: bool,
    /// `n·h(X) ≤ h(η) + log C_η`.
    pub eta_height_lower: bool,
    /// `(n − ε)·h(X) ≤ (2 + m)(h(x) + h(y)) + 2 log C_a + log C_η`.
    pub derived: bool,
    /// The conjectural step implies the derived inequality on this row.
    pub implication_ok: bool,
}

impl DirectionReport {
    fn exact_ok(&self) -> bool {
        self.counting_le_height
            && self.shifted_bound
            && self.eta_height_lower
            && self.implication_ok
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MainRow {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
    pub forward: DirectionReport,
    pub reversed: DirectionReport,
    /// `(n − ε)(h(x) + h(y)) ≤ (4 + 2m)(h(x) + h(y)) + log C_total`.
    pub summed: bool,
    /// `h(x) + h(y)` exceeds the ceiling `H*`.
    pub exceeds_ceiling: bool,
    /// Rows above the ceiling violate at least one conjectural step.
    pub contradiction_consistent: bool,
}

impl MainRow {
    pub fn exact_ok(&self) -> bool {
        self.forward.exact_ok() && self.reversed.exact_ok() && self.contradiction_consistent
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedRow {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MainReport {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub epsilon: Rational,
    /// The conjectural step is applied with `ε/n` so the chain closes with `n − ε`.
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub conjectural_epsilon: Rational,
    pub constants: FamilyConstants,
    pub log_c_total: LogSum,
    pub log_c_total_approx: String,
    /// `n − 2m − 4 − ε`; the ceiling is finite only when this is positive.
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub gap: Rational,
    /// `H* = log C_total / (n − 2m − 4 − ε)` on `h(x) + h(y)`.
    pub ceiling: Option<LogSum>,
    pub ceiling_approx: Option<String>,
    pub rows: Vec<MainRow>,
    pub excluded: Vec<ExcludedRow>,
    pub note: String,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    s: &SContext,
    fam: &YiFamily,
    consts: &FamilyConstants,
    epsilon: &Rational,
    hx: &Magnitude,
    hy: &Magnitude,
    x: &Rational,
    triple: [&Rational; 3],
) -> Result<DirectionReport> {
    let n = q(fam.n as i64);
    let m = q(fam.m as i64);
    let [eta, u, zeta] = triple;
    let max_aux_height = [eta, u, zeta]
        .iter()
        .map(|v| height(v))
        .max()
        .expect("three");
    let n2 = |v: &Rational| counting_trunc(s, 2, v);
    let n2_sum = n2(eta)? * n2(u)? * n2(zeta)? * n2(&(eta + u + zeta))?;
    let conj_coeff = Rational::one() - epsilon / &n;
    let conj_lhs = LogSum::new().plus(conj_coeff, &max_aux_height);
    let conjectural_step = if conj_lhs.at_most(&LogSum::from(n2_sum.clone())) {
        PointVerdict::Holds
    } else {
        PointVerdict::Violated
    };
    let n1x = counting_trunc(s, 1, x)?;
    let shifted = pow(x, fam.m) + &fam.a;
    let c_x = counting(s, &shifted)?;
    let h_eta = height(eta);
    let derived_lhs = LogSum::new().plus(&n - epsilon, hx);
    let derived_rhs = LogSum::new()
        .plus(q(2) + &m, hx)
        .plus(q(2) + &m, hy)
        .plus_sum(&consts.log_c_direction());
    let derived = derived_lhs.at_most(&derived_rhs);
    Ok(DirectionReport {
        counting_le_height: n1x <= *hx,
        shifted_bound: LogSum::from(c_x).at_most(&LogSum::new().plus(m, hx).plus_log(&consts.c_a)),
        eta_height_lower: LogSum::new()
            .plus(n, hx)
            .at_most(&LogSum::from(h_eta).plus_sum(&consts.log_c_eta())),
        derived,
        implication_ok: conjectural_step == PointVerdict::Violated || derived,
        conjectural_step,
        max_aux_height,
        n2_sum,
    })
}

/// The full chain from the conjectural step to the contradiction with
/// `n > 2m + 4`, per row and in both directions.
pub fn main_inequality_report(
    s: &SContext,
    fam: &YiFamily,
    epsilon: &Rational,
    rows: &[TraceRow],
) -> Result<MainReport> {
    let validation = yi_validate(s, fam);
    if !validation.overall {
        return Err(Error::HypothesesUnmet(validation.failures().join(", ")));
    }
    let n = q(fam.n as i64);
    if epsilon.is_negative() || *epsilon >= n {
        return Err(Error::Invalid("epsilon must satisfy 0 ≤ ε < n".into()));
    }
    let consts = FamilyConstants::new(fam);
    let log_c_total = consts.log_c_total();
    let gap = &n - q(2 * fam.m as i64 + 4) - epsilon;
    let ceiling = gap
        .is_positive()
        .then(|| log_c_total.clone().scaled(&gap.recip()));
    let mut excluded = Vec::new();
    let mut kept = Vec::new();
    for row in rows {
        if let Some(reason) = &row.degenerate {
            excluded.push(ExcludedRow {
                x: row.x.clone(),
                y: row.y.clone(),
                reason: reason.clone(),
            });
        } else if !row.shares {
            excluded.push(ExcludedRow {
                x: row.x.clone(),
                y: row.y.clone(),
                reason: "u is not an S-unit".into(),
            });
        } else {
            kept.push(row);
        }
    }
    let main_rows = kept
        .par_iter()
        .map(|row| {
            let forward = direction(
                s,
                fam,
                &consts,
                epsilon,
                &row.h_x,
                &row.h_y,
                &row.x,
                [&row.eta, &row.u, &row.zeta],
            )?;
            // Reversed roles: (η', u', ζ') = (−ζ/u, 1/u, −η/u).
            let (eta_r, u_r, zeta_r) = (-&row.zeta / &row.u, row.u.recip(), -&row.eta / &row.u);
            let reversed = direction(
                s,
                fam,
                &consts,
                epsilon,
                &row.h_y,
                &row.h_x,
                &row.y,
                [&eta_r, &u_r, &zeta_r],
            )?;
            let hsum = LogSum::from(row.h_x.clone()).plus_log(&row.h_y);
            let summed = hsum
                .clone()
                .scaled(&(&n - epsilon))
                .at_most(&hsum.scaled(&q(4 + 2 * fam.m as i64)).plus_sum(&log_c_total));
            let exceeds_ceiling = !summed;
            let both_hold = forward.conjectural_step == PointVerdict::Holds
                && reversed.conjectural_step == PointVerdict::Holds;
            Ok(MainRow {
                x: row.x.clone(),
                y: row.y.clone(),
                contradiction_consistent: !(exceeds_ceiling && both_hold)
                    && (!forward.derived || !reversed.derived || summed),
                forward,
                reversed,
                summed,
                exceeds_ceiling,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MainReport {
        conjectural_epsilon: epsilon / &n,
        epsilon: epsilon.clone(),
        log_c_total_approx: log_c_total.display(DISPLAY_DIGITS),
        ceiling_approx: ceiling.as_ref().map(|c| c.display(DISPLAY_DIGITS)),
        constants: consts,
        log_c_total,
        gap,
        ceiling,
        rows: main_rows,
        excluded,
        note:
            "the conjectural step is asymptotic; single-row violations are evidence, not failures"
                .into(),
    })
}

/// Rational nullspace of the matrix with rows `(η, u, ζ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependenceResult {
    pub rank: usize,
    #[serde(serialize_with = "ser_triples")]
    pub nullspace_basis: Vec<[Rational; 3]>,
}

fn ser_triples<S: serde::Serializer>(
    ts: &[[Rational; 3]],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = ts
        .iter()
        .map(|t| t.iter().map(format_rational).collect())
        .collect();
    strings.serialize(s)
}

/// Exact nullspace by Gauss–Jordan elimination; each basis vector is scaled
/// so its first nonzero entry is positive.
pub fn dependence_detect(rows: &[[Rational; 3]]) -> DependenceResult {
    let mut m: Vec<[Rational; 3]> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..3 {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let p = m[r][col].clone();
        for c in m[r].iter_mut() {
            *c /= &p;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (c, pc) in row.iter_mut().zip(&pivot_row) {
                    *c -= &f * pc;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..3).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v: [Rational; 3] = Default::default();
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            if v.iter()
                .find(|c| !c.is_zero())
                .is_some_and(Signed::is_negative)
            {
                for c in &mut v {
                    *c = -c.clone();
                }
            }
            v
        })
        .collect();
    DependenceResult {
        rank: pivots.len(),
        nullspace_basis: basis,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `c₁ = 0`: `c₂u + c₃ζ = 0`.
    C1Zero,
    /// `C₂ ≠ 0`, `C₃ ≠ 0`: `C₃ζu⁻¹ − u⁻¹ = −C₂`.
    C2C3Nonzero,
    /// `C₂ = 0`: `y^(n−m)(y^m + a) = b·C₃⁻¹·u⁻¹`.
    C2Zero,
    /// `C₃ = 0`: `u = C₂⁻¹`.
    C3Zero,
    /// `C₂ = C₃ = 0`, incompatible with `η + u + ζ = 1`.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum BranchDiagnostics {
    C1Zero {
        /// `ζ/u = −c₂/c₃` is forced.
        #[serde(with = "crate::qsarith::rational::serde_str::option")]
        ratio: Option<Rational>,
        /// `y^(n−m)(y^m + a)` per row; constant `−b·c₂/c₃` under the relation.
        #[serde(with = "crate::qsarith::rational::serde_str::vec")]
        shifted_values: Vec<Rational>,
        y_heights: Vec<Magnitude>,
    },
    C2C3Nonzero {
        rows: Vec<CorollaryStep>,
    },
    C2Zero {
        rows: Vec<UnitBranchRow>,
    },
    C3Zero {
        #[serde(with = "crate::qsarith::rational::serde_str::option")]
        constant_u: Option<Rational>,
        /// Off-diagonal rows `x ≠ y` with `P(x) = C₂⁻¹·P(y)`; evidence
        /// against strong uniqueness.
        off_diagonal: Vec<PairInput>,
    },
    Inconsistent {
        note: String,
    },
}

/// The corollary-step diagnostics for `z = ζ/u = (1/b)·y^(n−m)(y^m + a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorollaryStep {
    pub h_z: Magnitude,
    pub n1_z: Option<Magnitude>,
    /// `(1 − ε)·h(z) ≤ N^(1)(z)` (evidence).
    pub corollary_step: PointVerdict,
    /// `n·h(y) ≤ h(z) + log C_η`.
    pub height_lower_ok: bool,
    /// `N^(1)(z) ≤ (m + 1)·h(y) + log C_a`.
    pub counting_upper_ok: bool,
    /// `(1 − ε)·n·h(y) > (m + 1)·h(y) + log C_a + (1 − ε)·log C_η`, which
    /// forces the corollary step to fail on this row.
    pub forces_violation: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitBranchRow {
    pub y_s_unit: bool,
    pub ym_a_s_unit: bool,
    /// When both are S-units, `(−y^m/a) + (y^m + a)/a = 1` is an S-unit
    /// equation solution; whether the enumerator lists it.
    pub unit_equation_listed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchRow {
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub x: Rational,
    #[serde(with = "crate::qsarith::rational::serde_str")]
    pub y: Rational,
    /// `c₁η + c₂u + c₃ζ = 0`.
    pub annihilated: bool,
    /// The branch's displayed relation holds exactly.
    pub relation_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchReport {
    #[serde(serialize_with = "ser_triple")]
    pub triple: [Rational; 3],
    pub branch: Branch,
    #[serde(with = "crate::qsarith::rational::serde_str::option")]
    pub c2: Option<Rational>,
    #[serde(with = "crate::qsarith::rational::serde_str::option")]
    pub c3: Option<Rational>,
    pub rows: Vec<BranchRow>,
    pub diagnostics: BranchDiagnostics,
}

impl BranchReport {
    pub fn relations_ok(&self) -> bool {
        self.rows.iter().all(|r| !r.annihilated || r.relation_ok)
    }

    pub fn diagnostics_consistent(&self) -> bool {
        match &self.diagnostics {
            BranchDiagnostics::C2C3Nonzero { rows } => rows
                .iter()
                .all(|r| r.height_lower_ok && r.counting_upper_ok && r.consistent),
            _ => true,
        }
    }
}

fn ser_triple<S: serde::Serializer>(
    t: &[Rational; 3],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<String> = t.iter().map(format_rational).collect();
    strings.serialize(s)
}

/// Classifies a dependence `c₁η + c₂u + c₃ζ = 0` and checks the matching
/// relation on every row.
pub fn case_classify(
    s: &SContext,
    fam: &YiFamily,
    triple: &[Rational; 3],
    epsilon: &Rational,
    rows: &[TraceRow],
) -> Result<BranchReport> {
    if triple.iter().all(Zero::is_zero) {
        return Err(Error::Invalid("all-zero dependence triple".into()));
    }
    let [c1, c2, c3] = triple;
    let one = Rational::one();
    let shifted = |y: &Rational| pow(y, fam.n - fam.m) * (pow(y, fam.m) + &fam.a);
    let annihilated = |r: &TraceRow| (c1 * &r.eta + c2 * &r.u + c3 * &r.zeta).is_zero();

    let (big_c2, big_c3) = if c1.is_zero() {
        (None, None)
    } else {
        (Some(&one - c2 / c1), Some(&one - c3 / c1))
    };
    let branch = match (&big_c2, &big_c3) {
        (None, _) => Branch::C1Zero,
        (Some(a), Some(b)) if a.is_zero() && b.is_zero() => Branch::Inconsistent,
        (Some(a), _) if a.is_zero() => Branch::C2Zero,
        (_, Some(b)) if b.is_zero() => Branch::C3Zero,
        _ => Branch::C2C3Nonzero,
    };

    let relation = |r: &TraceRow| -> bool {
        match branch {
            Branch::C1Zero => (c2 * &r.u + c3 * &r.zeta).is_zero(),
            Branch::Inconsistent => false,
            Branch::C2Zero => {
                let c3b = big_c3.as_ref().expect("c1 ≠ 0");
                shifted(&r.y) == &fam.b / c3b / &r.u
            }
            Branch::C3Zero => r.u == big_c2.as_ref().expect("c1 ≠ 0").recip(),
            Branch::C2C3Nonzero => {
                let (b2, b3) = (big_c2.as_ref().unwrap(), big_c3.as_ref().unwrap());
                let uinv = r.u.recip();
                b3 * &r.zeta * &uinv - &uinv == -b2.clone()
            }
        }
    };
    let branch_rows: Vec<BranchRow> = rows
        .iter()
        .map(|r| BranchRow {
            x: r.x.clone(),
            y: r.y.clone(),
            annihilated: annihilated(r),
            relation_ok: relation(r),
        })
        .collect();

    let consts = FamilyConstants::new(fam);
    let diagnostics = match branch {
        Branch::C1Zero => BranchDiagnostics::C1Zero {
            ratio: (!c3.is_zero()).then(|| -(c2 / c3)),
            shifted_values: rows.iter().map(|r| shifted(&r.y)).collect(),
            y_heights: rows.iter().map(|r| r.h_y.clone()).collect(),
        },
        Branch::C2C3Nonzero => {
            let m = q(fam.m as i64);
            let n = q(fam.n as i64);
            let steps = rows
                .iter()
                .map(|r| {
                    let z = &r.zeta / &r.u;
                    let h_z = height(&z);
                    let n1_z = n_opt(s, Some(1), &z)?;
                    let corollary_step = match &n1_z {
                        Some(n1) => crate::subspace::verdict_for(&(&one - epsilon), &h_z, n1),
                        None => PointVerdict::Skipped,
                    };
                    let height_lower_ok = z.is_zero()
                        || LogSum::new()
                            .plus(n.clone(), &r.h_y)
                            .at_most(&LogSum::from(h_z.clone()).plus_sum(&consts.log_c_eta()));
                    let counting_upper_ok = n1_z.as_ref().is_none_or(|n1| {
                        LogSum::from(n1.clone())
                            .at_most(&LogSum::new().plus(&m + &one, &r.h_y).plus_log(&consts.c_a))
                    });
                    let weight = (&one - epsilon).max(Rational::zero());
                    let forces_violation = LogSum::new().plus(&weight * &n, &r.h_y).cmp_exact(
                        &LogSum::new()
                            .plus(&m + &one, &r.h_y)
                            .plus_log(&consts.c_a)
                            .plus_sum(&consts.log_c_eta().scaled(&weight)),
                    ) == Ordering::Greater;
                    let consistent = !forces_violation || corollary_step != PointVerdict::Holds;
                    Ok(CorollaryStep {
                        h_z,
                        n1_z,
                        corollary_step,
                        height_lower_ok,
                        counting_upper_ok,
                        forces_violation,
                        consistent,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            BranchDiagnostics::C2C3Nonzero { rows: steps }
        }
        Branch::C2Zero => {
            let unit_rows = rows
                .iter()
                .map(|r| {
                    let ym = pow(&r.y, fam.m);
                    let w = &ym + &fam.a;
                    let y_s_unit = is_s_unit(s, &r.y);
                    let ym_a_s_unit = is_s_unit(s, &w);
                    let listed = (y_s_unit && ym_a_s_unit && !fam.a.is_zero()).then(|| {
                        let u1 = -(&ym / &fam.a);
                        let v1 = &w / &fam.a;
                        let bound = s
                            .primes()
                            .iter()
                            .map(|&p| ord(p, &u1).map(|e| e.unsigned_abs()).unwrap_or(0))
                            .max()
                            .unwrap_or(0) as u32;
                        unit_equation_solutions(s, bound).contains(&UnitPair { u: u1, v: v1 })
                    });
                    UnitBranchRow {
                        y_s_unit,
                        ym_a_s_unit,
                        unit_equation_listed: listed,
                    }
                })
                .collect();
            BranchDiagnostics::C2Zero { rows: unit_rows }
        }
        Branch::C3Zero => {
            let c = big_c2.as_ref().expect("c1 ≠ 0").recip();
            let p = fam.poly();
            BranchDiagnostics::C3Zero {
                off_diagonal: rows
                    .iter()
                    .filter(|r| r.x != r.y && p.eval(&r.x) == &c * p.eval(&r.y))
                    .map(|r| PairInput {
                        x: r.x.clone(),
                        y: r.y.clone(),
                    })
                    .collect(),
                constant_u: Some(c),
            }
        }
        Branch::Inconsistent => BranchDiagnostics::Inconsistent {
            note: "C2 = C3 = 0 forces 0 = 1 on rows with η + u + ζ = 1".into(),
        },
    };
    Ok(BranchReport {
        triple: triple.clone(),
        branch,
        c2: big_c2,
        c3: big_c3,
        rows: branch_rows,
        diagnostics,
    })
}

/// Off-diagonal solutions of `P(x) = c·P(y)` in the box, sorted canonically.
pub fn strong_uniqueness_search(
    s: &SContext,
    p: &RatPoly,
    c: &Rational,
    search: &SearchBox,
) -> std::result::Result<Vec<PairInput>, SearchError<PairInput>> {
    if c.is_zero() {
        return Err(Error::Invalid("c must be nonzero".into()).into());
    }
    scan_box(s, p, search, |x, y, px, py| {
        (*px == c * py).then(|| PairInput {
            x: x.clone(),
            y: y.clone(),
        })
    })
}

/// Everything the trace command reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub validation: ValidationReport,
    pub rows: Vec<TraceRow>,
    pub roth: Vec<RothRow>,
    pub unit_heights: Vec<UnitHeightRow>,
    pub truncated_bounds: Vec<TruncRow>,
    pub main: MainReport,
    pub dependence: DependenceResult,
    pub branches: Vec<BranchReport>,
    pub excluded: Vec<ExcludedRow>,
    pub exact_failures: Vec<String>,
    pub all_exact_ok: bool,
}

/// Runs every check on the given pairs. Pairs with `P(y) = 0` are excluded.
pub fn trace(
    s: &SContext,
    fam: &YiFamily,
    epsilon: &Rational,
    pairs: &[PairInput],
) -> Result<TraceReport> {
    let validation = yi_validate(s, fam);
    if !validation.overall {
        return Err(Error::HypothesesUnmet(validation.failures().join(", ")));
    }
    let p = fam.poly();
    let built: Vec<(&PairInput, Result<TraceRow>)> = pairs
        .par_iter()
        .map(|pr| (pr, trace_row(s, fam, &pr.x, &pr.y)))
        .collect();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (pr, b) in built {
        match b {
            Ok(r) => rows.push(r),
            Err(Error::VanishingValue(_)) => excluded.push(ExcludedRow {
                x: pr.x.clone(),
                y: pr.y.clone(),
                reason: "P(y) vanishes".into(),
            }),
            Err(e) => return Err(e),
        }
    }
    let roth = roth_chain_report(s, &p, &rows)?;
    let unit_heights = unit_height_check(&p, &rows);
    let truncated_bounds = trunc_bound_check(s, &rows)?;
    let main = main_inequality_report(s, fam, epsilon, &rows)?;
    let triples: Vec<[Rational; 3]> = rows.iter().map(TraceRow::triple).collect();
    let dependence = dependence_detect(&triples);
    let branches = if rows.is_empty() {
        Vec::new()
    } else {
        dependence
            .nullspace_basis
            .iter()
            .map(|t| case_classify(s, fam, t, epsilon, &rows))
            .collect::<Result<Vec<_>>>()?
    };

    let mut exact_failures = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let tag = format!(
            "row {i} (x={}, y={})",
            format_rational(&r.x),
            format_rational(&r.y)
        );
        if !r.identity_ok {
            exact_failures.push(format!("{tag}: identity"));
        }
        if !r.shares {
            exact_failures.push(format!("{tag}: u is not an S-unit"));
        }
        if roth[i].error.is_none() && !roth[i].kernel_equal {
            exact_failures.push(format!("{tag}: sharing kernel N(P(x)) = N(P(y))"));
        }
        if roth[i].error.is_none() && !roth[i].upper_bound_ok {
            exact_failures.push(format!("{tag}: N(P(x)) ≤ n h(x) + log C_P"));
        }
        if !unit_heights[i].ok {
            exact_failures.push(format!("{tag}: h(u) ≤ h(P(x)) + h(P(y))"));
        }
        if r.shares && !truncated_bounds[i].ok() {
            exact_failures.push(format!("{tag}: truncated counting bounds"));
        }
    }
    for mr in &main.rows {
        if !mr.exact_ok() {
            exact_failures.push(format!(
                "main chain (x={}, y={}): explicit-constant bound",
                format_rational(&mr.x),
                format_rational(&mr.y)
            ));
        }
    }
    for br in &branches {
        if !br.relations_ok() || !br.diagnostics_consistent() {
            exact_failures.push(format!("branch {:?}: displayed relation", br.branch));
        }
    }
    let all_exact_ok = exact_failures.is_empty();
    Ok(TraceReport {
        validation,
        rows,
        roth,
        unit_heights,
        truncated_bounds,
        main,
        dependence,
        branches,
        excluded,
        exact_failures,
        all_exact_ok,
    })
}
