//! Command-line front end. Every run produces a JSON envelope
//! `{tool, version, command, config, result}` that is byte-stable for a
//! given configuration, and optionally a plain-text table.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use crate::error::Error;
use crate::heightfn::{counting, display_log, height, Magnitude, DISPLAY_DIGITS};
use crate::polyring::{yi_validate, RatPoly, YiFamily};
use crate::qsarith::{
    format_rational, parse_rational, unit_equation_solutions, Rational, SContext,
    DEFAULT_FACTORING_BUDGET,
};
use crate::sharing::{
    admissibility_report, ord_profile_equal, search_shared_pairs, PairInput, PairSequence,
    SearchBox, SearchError, DEFAULT_MAX_PAIRS,
};
use crate::subspace::{
    corollary_eval, evaluate_conjecture, summarize, LinearFormSystem, PointMode,
};
use crate::yitrace::{strong_uniqueness_search, trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

fn parse_q(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "urs",
    version,
    about = "Exact S-unit sharing and height inequality checks over Q"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Normalize,
    Strict,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Comma-separated finite primes of S.
    #[arg(long = "s", global = true, value_delimiter = ',')]
    pub s: Vec<u64>,
    /// Trial-division budget for factoring.
    #[arg(long, global = true, default_value_t = DEFAULT_FACTORING_BUDGET)]
    pub budget: u64,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_q, default_value = "1/10", allow_hyphen_values = true)]
    pub epsilon: Rational,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_parser = parse_q, allow_hyphen_values = true)]
    pub a: Option<Rational>,
    #[arg(long, value_parser = parse_q, allow_hyphen_values = true)]
    pub b: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct PolySource {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Polynomial file `{"coeffs": [...]}`, constant term first.
    #[arg(long)]
    pub poly: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoxArgs {
    /// Height bound of the S-integer box.
    #[arg(long, default_value_t = 30)]
    pub height: u64,
    /// Bound on S-denominator exponents.
    #[arg(long, default_value_t = 0)]
    pub exp: u32,
    /// Pair budget of the enumeration.
    #[arg(long, default_value_t = DEFAULT_MAX_PAIRS)]
    pub max_pairs: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the hypotheses of the trinomial family X^n + a X^m + b.
    ValidatePoly {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Sharing certificates for pairs from a file.
    Share {
        #[command(flatten)]
        source: PolySource,
        #[arg(long)]
        pairs: PathBuf,
        /// Height threshold (a positive integer H standing for log H) for the admissibility statistics.
        #[arg(long)]
        threshold: Option<String>,
    },
    /// Verify every step of the uniqueness argument on shared pairs.
    Trace {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Evaluate the truncated subspace inequality, or the two-term corollary.
    Subspace {
        #[arg(long, required_unless_present = "corollary")]
        forms: Option<PathBuf>,
        #[arg(long, required_unless_present = "corollary")]
        points: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Normalize)]
        mode: ModeArg,
        /// `A,B,C` of the relation A·x + B·y = C.
        #[arg(long, value_delimiter = ',', value_parser = parse_q, allow_hyphen_values = true, conflicts_with_all = ["forms", "points"], requires = "pairs")]
        corollary: Option<Vec<Rational>>,
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Enumerate solutions of u + v = 1 with u a bounded S-unit.
    UnitEq {
        #[arg(long)]
        bound: u32,
    },
    /// Enumerate sharing pairs in an S-integer box.
    SearchShared {
        #[command(flatten)]
        source: PolySource,
        #[command(flatten)]
        search: BoxArgs,
    },
    /// Enumerate off-diagonal solutions of P(x) = c·P(y) in an S-integer box.
    SearchSu {
        #[command(flatten)]
        source: PolySource,
        #[arg(long, value_parser = parse_q, default_value = "1", allow_hyphen_values = true)]
        c: Rational,
        #[command(flatten)]
        search: BoxArgs,
    },
}

/// The resolved configuration, echoed in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub s_primes: Vec<u64>,
    pub epsilon: String,
    pub factoring_budget: u64,
    pub format: Format,
    pub out: Option<String>,
    /// Subcommand arguments, rationals in canonical form.
    pub args: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    result: T,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub json: Option<String>,
    pub table: Option<String>,
    pub message: Option<String>,
}

impl Outcome {
    fn failure(code: i32, message: String) -> Self {
        Outcome {
            code,
            json: None,
            table: None,
            message: Some(message),
        }
    }
}

struct Rendered {
    code: i32,
    json: String,
    table: String,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::HypothesesUnmet(_) => EXIT_VERDICT,
        _ => EXIT_USAGE,
    }
}

fn fail(e: Error) -> Outcome {
    Outcome::failure(exit_code(&e), e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            Outcome {
                code,
                json: None,
                table: None,
                message: Some(e.to_string()),
            }
        }
    }
}

/// Runs a parsed command, on a dedicated pool when `--workers` is given.
pub fn execute(cli: &Cli) -> Outcome {
    match cli.global.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => Outcome::failure(EXIT_USAGE, e.to_string()),
        },
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let s = match SContext::new(g.s.iter().copied(), g.budget) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mut config = RunConfig {
        s_primes: s.primes().to_vec(),
        epsilon: format_rational(&g.epsilon),
        factoring_budget: g.budget,
        format: g.format,
        out: g.out.as_ref().map(|p| p.display().to_string()),
        args: BTreeMap::new(),
    };
    let rendered = match &cli.command {
        Command::ValidatePoly { family } => validate_poly(&s, family, &mut config),
        Command::Share {
            source,
            pairs,
            threshold,
        } => share(&s, source, pairs, threshold.as_deref(), &mut config),
        Command::Trace { family, pairs } => trace_cmd(&s, family, pairs, &g.epsilon, &mut config),
        Command::Subspace {
            forms,
            points,
            mode,
            corollary,
            pairs,
        } => match corollary {
            Some(abc) => corollary_cmd(&s, abc, pairs.as_deref(), &g.epsilon, &mut config),
            None => subspace_cmd(
                &s,
                forms.as_deref(),
                points.as_deref(),
                *mode,
                &g.epsilon,
                &mut config,
            ),
        },
        Command::UnitEq { bound } => unit_eq(&s, *bound, &mut config),
        Command::SearchShared { source, search } => search_shared(&s, source, search, &mut config),
        Command::SearchSu { source, c, search } => search_su(&s, source, c, search, &mut config),
    };
    let r = match rendered {
        Ok(r) => r,
        Err(o) => return o,
    };
    Outcome {
        code: r.code,
        json: Some(r.json),
        table: Some(r.table),
        message: None,
    }
}

fn envelope<T: Serialize>(command: &'static str, config: &RunConfig, result: T) -> String {
    let env = Envelope {
        tool: "urs",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

fn echo(config: &mut RunConfig, key: &str, value: impl Serialize) {
    config.args.insert(
        key.to_string(),
        serde_json::to_value(value).expect("serializable"),
    );
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::failure(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Outcome::failure(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn family(f: &FamilyArgs, config: &mut RunConfig) -> Result<YiFamily, Outcome> {
    let (Some(n), Some(m), Some(a), Some(b)) = (f.n, f.m, &f.a, &f.b) else {
        return Err(Outcome::failure(
            EXIT_USAGE,
            "--n, --m, --a and --b are all required".into(),
        ));
    };
    echo(config, "n", n);
    echo(config, "m", m);
    echo(config, "a", format_rational(a));
    echo(config, "b", format_rational(b));
    YiFamily::new(n, m, a.clone(), b.clone()).map_err(fail)
}

fn poly_source(src: &PolySource, config: &mut RunConfig) -> Result<RatPoly, Outcome> {
    match &src.poly {
        Some(path) => {
            if src.family.n.is_some()
                || src.family.m.is_some()
                || src.family.a.is_some()
                || src.family.b.is_some()
            {
                return Err(Outcome::failure(
                    EXIT_USAGE,
                    "--poly conflicts with --n/--m/--a/--b".into(),
                ));
            }
            echo(config, "poly", path.display().to_string());
            let p: RatPoly = read_json(path)?;
            echo(config, "polynomial", p.to_string());
            Ok(p)
        }
        None => {
            let p = family(&src.family, config)?.poly();
            echo(config, "polynomial", p.to_string());
            Ok(p)
        }
    }
}

fn search_box(b: &BoxArgs, config: &mut RunConfig) -> SearchBox {
    echo(config, "height", b.height);
    echo(config, "exp", b.exp);
    echo(config, "max_pairs", b.max_pairs);
    SearchBox {
        height_bound: b.height,
        exp_bound: b.exp,
        max_pairs: b.max_pairs,
    }
}

/// Plain table with left-aligned columns.
fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let pad = w - c.chars().count();
            out.push_str(c);
            out.extend(std::iter::repeat_n(' ', pad));
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out += &line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    );
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

fn mag(m: &Magnitude) -> String {
    format!("{} ({})", m.value(), display_log(m, DISPLAY_DIGITS))
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn validate_poly(
    s: &SContext,
    f: &FamilyArgs,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let fam = family(f, config)?;
    let rep = yi_validate(s, &fam);
    let rows: Vec<Vec<String>> = [
        ("coprime", &rep.coprime),
        ("degree_gap", &rep.degree_gap),
        ("a_s_unit", &rep.a_s_unit),
        ("b_s_unit", &rep.b_s_unit),
        ("squarefree", &rep.squarefree),
        ("roots_s_units", &rep.roots_s_units),
    ]
    .iter()
    .map(|(k, v)| {
        vec![
            k.to_string(),
            if v.pass { "pass" } else { "FAIL" }.into(),
            v.detail.clone(),
        ]
    })
    .collect();
    let mut t = format!("{}\n", rep.polynomial);
    t += &table(&["hypothesis", "verdict", "detail"], &rows);
    let _ = writeln!(t, "overall: {}", if rep.overall { "pass" } else { "FAIL" });
    Ok(Rendered {
        code: if rep.overall { EXIT_OK } else { EXIT_VERDICT },
        json: envelope("validate-poly", config, &rep),
        table: t,
    })
}

#[derive(Serialize)]
struct ShareRow {
    #[serde(flatten)]
    point: crate::sharing::SharePoint,
    profile_equal: Option<bool>,
    agree: bool,
}

#[derive(Serialize)]
struct ShareResult {
    rows: Vec<ShareRow>,
    all_share: bool,
    admissibility: Option<crate::sharing::AdmissibilityReport>,
}

fn share(
    s: &SContext,
    src: &PolySource,
    pairs: &Path,
    threshold: Option<&str>,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let p = poly_source(src, config)?;
    echo(config, "pairs", pairs.display().to_string());
    let input: Vec<PairInput> = read_json(pairs)?;
    let threshold = threshold
        .map(|t| {
            t.parse::<BigUint>()
                .map_err(|e| Error::Invalid(format!("threshold: {e}")))
                .and_then(Magnitude::new)
        })
        .transpose()
        .map_err(fail)?;
    echo(
        config,
        "threshold",
        threshold.as_ref().map(|t| t.value().to_string()),
    );
    let seq = PairSequence::new(s, &p, &input).map_err(fail)?;
    let rows = seq
        .rows
        .iter()
        .map(|pt| {
            let profile_equal = match ord_profile_equal(s, &p, &pt.x, &pt.y) {
                Ok(b) => Some(b),
                Err(Error::VanishingValue(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(ShareRow {
                agree: profile_equal.is_none_or(|b| b == pt.shares),
                point: pt.clone(),
                profile_equal,
            })
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(fail)?;
    let all_share = rows.iter().all(|r| r.point.shares);
    let all_agree = rows.iter().all(|r| r.agree);
    let res = ShareResult {
        admissibility: threshold.as_ref().map(|t| admissibility_report(&seq, t)),
        all_share,
        rows,
    };
    let trows: Vec<Vec<String>> = res
        .rows
        .iter()
        .map(|r| {
            vec![
                format_rational(&r.point.x),
                format_rational(&r.point.y),
                r.point
                    .u
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_else(|| "-".into()),
                yes(r.point.shares),
                r.profile_equal.map(yes).unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    let mut t = table(&["x", "y", "u", "shares", "profile_equal"], &trows);
    if let Some(a) = &res.admissibility {
        let _ = writeln!(t, "admissibility: {}", a.note);
    }
    Ok(Rendered {
        code: if all_share && all_agree {
            EXIT_OK
        } else {
            EXIT_VERDICT
        },
        json: envelope("share", config, &res),
        table: t,
    })
}

fn trace_cmd(
    s: &SContext,
    f: &FamilyArgs,
    pairs: &Path,
    epsilon: &Rational,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let fam = family(f, config)?;
    echo(config, "pairs", pairs.display().to_string());
    let input: Vec<PairInput> = read_json(pairs)?;
    let rep = trace(s, &fam, epsilon, &input).map_err(fail)?;
    let trows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .zip(&rep.roth)
        .map(|(r, roth)| {
            vec![
                format_rational(&r.x),
                format_rational(&r.y),
                format_rational(&r.u),
                format_rational(&r.eta),
                format_rational(&r.zeta),
                yes(r.identity_ok),
                yes(r.shares),
                yes(roth.kernel_equal),
                r.degenerate.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut t = table(
        &[
            "x", "y", "u", "eta", "zeta", "identity", "shares", "kernel", "note",
        ],
        &trows,
    );
    let _ = writeln!(
        t,
        "log C_total ~ {}; ceiling on h(x)+h(y): {}",
        rep.main.log_c_total_approx,
        rep.main
            .ceiling_approx
            .as_deref()
            .unwrap_or("none (gap not positive)")
    );
    let _ = writeln!(
        t,
        "dependence rank {}, nullspace dimension {}",
        rep.dependence.rank,
        rep.dependence.nullspace_basis.len()
    );
    for b in &rep.branches {
        let triple: Vec<String> = b.triple.iter().map(format_rational).collect();
        let _ = writeln!(t, "  ({}) -> {:?}", triple.join(", "), b.branch);
    }
    for e in &rep.exact_failures {
        let _ = writeln!(t, "FAILED: {e}");
    }
    let _ = writeln!(
        t,
        "exact checks: {}",
        if rep.all_exact_ok { "all pass" } else { "FAIL" }
    );
    Ok(Rendered {
        code: if rep.all_exact_ok {
            EXIT_OK
        } else {
            EXIT_VERDICT
        },
        json: envelope("trace", config, &rep),
        table: t,
    })
}

#[derive(Serialize)]
struct SubspaceResult {
    system: LinearFormSystem,
    points: Vec<crate::subspace::DefectReport>,
    summary: crate::subspace::DefectSummary,
}

fn subspace_cmd(
    s: &SContext,
    forms: Option<&Path>,
    points: Option<&Path>,
    mode: ModeArg,
    epsilon: &Rational,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let (Some(forms), Some(points)) = (forms, points) else {
        return Err(Outcome::failure(
            EXIT_USAGE,
            "--forms and --points are required".into(),
        ));
    };
    echo(config, "forms", forms.display().to_string());
    echo(config, "points", points.display().to_string());
    echo(config, "mode", mode);
    let sys: LinearFormSystem = read_json(forms)?;
    let raw: Vec<Vec<String>> = read_json(points)?;
    let pts = raw
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| {
                    parse_rational(c).map_err(|e| {
                        Outcome::failure(
                            EXIT_USAGE,
                            format!("{}: [{i}][{j}]: {e}", points.display()),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mode = match mode {
        ModeArg::Normalize => PointMode::Normalize,
        ModeArg::Strict => PointMode::Strict,
    };
    let reports = evaluate_conjecture(s, &sys, epsilon, &pts, mode).map_err(fail)?;
    let summary = summarize(&reports);
    let trows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.point
                    .iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(", "),
                mag(&r.max_height),
                r.rhs.as_ref().map(mag).unwrap_or_else(|| "-".into()),
                format!("{:?}", r.verdict).to_lowercase(),
            ]
        })
        .collect();
    let mut t = table(&["point", "max height", "rhs", "verdict"], &trows);
    let _ = writeln!(
        t,
        "holds {}, violated {}, skipped {}",
        summary.holds, summary.violated, summary.skipped
    );
    let res = SubspaceResult {
        system: sys,
        points: reports,
        summary,
    };
    Ok(Rendered {
        code: EXIT_OK,
        json: envelope("subspace", config, &res),
        table: t,
    })
}

fn corollary_cmd(
    s: &SContext,
    abc: &[Rational],
    pairs: Option<&Path>,
    epsilon: &Rational,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let [a, b, c] = abc else {
        return Err(Outcome::failure(
            EXIT_USAGE,
            "--corollary takes exactly A,B,C".into(),
        ));
    };
    let Some(pairs) = pairs else {
        return Err(Outcome::failure(EXIT_USAGE, "--pairs is required".into()));
    };
    echo(
        config,
        "corollary",
        abc.iter().map(format_rational).collect::<Vec<_>>(),
    );
    echo(config, "pairs", pairs.display().to_string());
    let input: Vec<PairInput> = read_json(pairs)?;
    let rows = corollary_eval(s, a, b, c, epsilon, &input).map_err(fail)?;
    let trows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let verdict = |v: Option<crate::subspace::PointVerdict>| {
                v.map(|v| format!("{v:?}").to_lowercase())
                    .unwrap_or_else(|| "-".into())
            };
            vec![
                format_rational(&r.x),
                format_rational(&r.y),
                verdict(r.direct.as_ref().map(|d| d.verdict)),
                verdict(r.delegated.as_ref().map(|d| d.verdict)),
                yes(r.agree),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let t = table(&["x", "y", "direct", "delegated", "agree", "error"], &trows);
    let ok = rows.iter().all(|r| r.agree && r.error.is_none());
    Ok(Rendered {
        code: if ok { EXIT_OK } else { EXIT_VERDICT },
        json: envelope("subspace", config, &rows),
        table: t,
    })
}

fn unit_eq(s: &SContext, bound: u32, config: &mut RunConfig) -> Result<Rendered, Outcome> {
    echo(config, "bound", bound);
    let sols = unit_equation_solutions(s, bound);
    let trows: Vec<Vec<String>> = sols
        .iter()
        .map(|p| vec![format_rational(&p.u), format_rational(&p.v)])
        .collect();
    let mut t = table(&["u", "v"], &trows);
    let _ = writeln!(t, "{} solutions", sols.len());
    Ok(Rendered {
        code: EXIT_OK,
        json: envelope("unit-eq", config, &sols),
        table: t,
    })
}

#[derive(Serialize)]
struct SharedRow {
    #[serde(flatten)]
    point: crate::sharing::SharePoint,
    counting_px: Option<Magnitude>,
    counting_py: Option<Magnitude>,
    kernel_equal: bool,
}

#[derive(Serialize)]
struct SearchResult<T> {
    complete: bool,
    completed_rows: Option<usize>,
    total_rows: Option<usize>,
    found: Vec<T>,
}

fn search_shared(
    s: &SContext,
    src: &PolySource,
    b: &BoxArgs,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let p = poly_source(src, config)?;
    let sb = search_box(b, config);
    let (found, partial) = match search_shared_pairs(s, &p, &sb) {
        Ok(f) => (f, None),
        Err(SearchError::Budget(part)) => {
            (part.found, Some((part.completed_rows, part.total_rows)))
        }
        Err(SearchError::Arith(e)) => return Err(fail(e)),
    };
    let rows = found
        .into_iter()
        .map(|pt| {
            let (px, py) = (p.eval(&pt.x), p.eval(&pt.y));
            let c = |v: &Rational| -> crate::Result<Option<Magnitude>> {
                if num_traits::Zero::is_zero(v) {
                    Ok(None)
                } else {
                    counting(s, v).map(Some)
                }
            };
            let (cx, cy) = (c(&px)?, c(&py)?);
            Ok(SharedRow {
                kernel_equal: cx == cy,
                counting_px: cx,
                counting_py: cy,
                point: pt,
            })
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(fail)?;
    let kernel_ok = rows.iter().all(|r| r.kernel_equal);
    let trows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format_rational(&r.point.x),
                format_rational(&r.point.y),
                r.point
                    .u
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_else(|| "-".into()),
                height(&r.point.x).value().to_string(),
                yes(r.kernel_equal),
            ]
        })
        .collect();
    let mut t = table(&["x", "y", "u", "H(x)", "kernel"], &trows);
    let _ = writeln!(
        t,
        "{} pairs{}",
        rows.len(),
        if partial.is_some() {
            " (budget exceeded, partial)"
        } else {
            ""
        }
    );
    let res = SearchResult {
        complete: partial.is_none(),
        completed_rows: partial.map(|p| p.0),
        total_rows: partial.map(|p| p.1),
        found: rows,
    };
    let code = match (partial.is_some(), kernel_ok) {
        (true, _) => EXIT_BUDGET,
        (false, false) => EXIT_VERDICT,
        (false, true) => EXIT_OK,
    };
    Ok(Rendered {
        code,
        json: envelope("search-shared", config, &res),
        table: t,
    })
}

fn search_su(
    s: &SContext,
    src: &PolySource,
    c: &Rational,
    b: &BoxArgs,
    config: &mut RunConfig,
) -> Result<Rendered, Outcome> {
    let p = poly_source(src, config)?;
    echo(config, "c", format_rational(c));
    let sb = search_box(b, config);
    let (found, partial) = match strong_uniqueness_search(s, &p, c, &sb) {
        Ok(f) => (f, None),
        Err(SearchError::Budget(part)) => {
            (part.found, Some((part.completed_rows, part.total_rows)))
        }
        Err(SearchError::Arith(e)) => return Err(fail(e)),
    };
    let trows: Vec<Vec<String>> = found
        .iter()
        .map(|pr| vec![format_rational(&pr.x), format_rational(&pr.y)])
        .collect();
    let mut t = table(&["x", "y"], &trows);
    let _ = writeln!(
        t,
        "{} off-diagonal pairs{}",
        found.len(),
        if partial.is_some() {
            " (budget exceeded, partial)"
        } else {
            ""
        }
    );
    let res = SearchResult {
        complete: partial.is_none(),
        completed_rows: partial.map(|p| p.0),
        total_rows: partial.map(|p| p.1),
        found,
    };
    Ok(Rendered {
        code: if partial.is_some() {
            EXIT_BUDGET
        } else {
            EXIT_OK
        },
        json: envelope("search-su", config, &res),
        table: t,
    })
}

/// Writes an outcome to the standard streams and the `--out` file.
pub fn emit(outcome: &Outcome, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    if let Some(msg) = &outcome.message {
        if outcome.code == EXIT_OK {
            print!("{msg}");
        } else {
            eprintln!("error: {}", msg.trim_end());
        }
    }
    if let Some(json) = &outcome.json {
        match out {
            Some(path) => std::fs::write(path, json)?,
            None if format != Format::Table => print!("{json}"),
            None => {}
        }
    }
    if let Some(t) = &outcome.table {
        if format != Format::Json {
            print!("{t}");
        }
    }
    Ok(())
}
