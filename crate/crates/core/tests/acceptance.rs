//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use urs::heightfn::{cmp_scaled, counting, counting_trunc, Magnitude, ScaledLog};
use urs::polyring::{discriminant, yi_validate, YiFamily};
use urs::qsarith::{
    int, ord, parse_rational, rat, reconstruct, unit_equation_solutions, Rational, SContext,
};
use urs::sharing::{ord_profile_equal, search_shared_pairs, share_check, PairInput, SearchBox};
use urs::subspace::{
    corollary_eval, evaluate_conjecture, LinearFormSystem, PointMode, PointVerdict,
};
use urs::yitrace::{identity_check, strong_uniqueness_search};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_secs), || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn yi() -> YiFamily {
    YiFamily::new(7, 1, int(1), int(1)).unwrap()
}

fn s23() -> SContext {
    SContext::with_primes(&[2, 3]).unwrap()
}

/// Trial-division factorization of a positive integer.
fn oracle_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn random_rational(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    loop {
        let n = rng.gen_range(-max..=max);
        let d = rng.gen_range(1..=max);
        if n != 0 {
            return rat(n, d);
        }
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let x = random_rational(&mut rng, 1_000_000);
        let num = x
            .numer()
            .magnitude()
            .to_u64_digits()
            .first()
            .copied()
            .unwrap_or(1);
        let den = x
            .denom()
            .magnitude()
            .to_u64_digits()
            .first()
            .copied()
            .unwrap_or(1);
        let mut primes: Vec<u64> = oracle_factor(num)
            .into_iter()
            .chain(oracle_factor(den))
            .map(|(p, _)| p)
            .collect();
        primes.sort_unstable();
        for &(p, e) in &oracle_factor(num) {
            ensure(ord(p, &x).unwrap() == e as i64, || format!("ord_{p}({x})"))?;
        }
        for &(p, e) in &oracle_factor(den) {
            ensure(ord(p, &x).unwrap() == -(e as i64), || {
                format!("ord_{p}({x})")
            })?;
        }
        let back = reconstruct(&x, &primes).map_err(|e| e.to_string())?;
        ensure(back == x, || format!("reconstruct({x}) = {back}"))?;
    }
    within(start.elapsed(), 10)?;
    Ok("10000 rationals reconstruct exactly".into())
}

/// `∏_{p∉S} p^{min(e, level)}` over the numerator, by trial division.
fn oracle_counting(s: &[u64], x: &Rational, level: Option<u32>) -> BigUint {
    let num: u64 = x.numer().magnitude().try_into().unwrap();
    oracle_factor(num)
        .into_iter()
        .filter(|(p, _)| !s.contains(p))
        .map(|(p, e)| BigUint::from(p).pow(level.map_or(e, |l| e.min(l))))
        .product()
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = SContext::with_primes(&[2, 3, 5]).unwrap();
    for _ in 0..1000 {
        // Monotone truncation, against the oracle.
        let x = random_rational(&mut rng, 100_000);
        let n1 = counting_trunc(&s, 1, &x).unwrap();
        let n2 = counting_trunc(&s, 2, &x).unwrap();
        let n3 = counting_trunc(&s, 3, &x).unwrap();
        let n = counting(&s, &x).unwrap();
        ensure(n1 <= n2 && n2 <= n3 && n3 <= n, || {
            format!("monotone at {x}")
        })?;
        ensure(
            *n1.value() == oracle_counting(s.primes(), &x, Some(1)),
            || format!("N1({x})"),
        )?;
        ensure(*n.value() == oracle_counting(s.primes(), &x, None), || {
            format!("N({x})")
        })?;
    }
    for _ in 0..1000 {
        let x = random_rational(&mut rng, 1000);
        let n1 = counting_trunc(&s, 1, &x).unwrap();
        for k in 1..=5 {
            let xk = urs::qsarith::rational::pow(&x, k);
            ensure(counting_trunc(&s, 1, &xk).unwrap() == n1, || {
                format!("power law {x}^{k}")
            })?;
        }
    }
    let s_integer = |rng: &mut ChaCha8Rng| loop {
        let k = rng.gen_range(-50_000i64..=50_000);
        let d = 2i64.pow(rng.gen_range(0..4)) * 3i64.pow(rng.gen_range(0..3));
        if k != 0 {
            return rat(k, d);
        }
    };
    for _ in 0..1000 {
        let (x, y) = (s_integer(&mut rng), s_integer(&mut rng));
        let lhs = counting(&s, &(&x * &y)).unwrap();
        let rhs = &counting(&s, &x).unwrap() * &counting(&s, &y).unwrap();
        ensure(lhs == rhs, || format!("additivity at ({x}, {y})"))?;
    }
    for _ in 0..1000 {
        let (x, y) = (
            random_rational(&mut rng, 10_000),
            random_rational(&mut rng, 10_000),
        );
        let level = rng.gen_range(1..=3);
        let lhs = counting_trunc(&s, level, &(&x * &y)).unwrap();
        let rhs = &counting_trunc(&s, level, &x).unwrap() * &counting_trunc(&s, level, &y).unwrap();
        ensure(lhs <= rhs, || {
            format!("subadditivity at ({x}, {y}), level {level}")
        })?;
    }
    within(start.elapsed(), 30)?;
    Ok("4 x 1000 instances exact".into())
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fam = yi();
    let p = fam.poly();
    let mut checked = 0;
    while checked < 1000 {
        let x = random_rational(&mut rng, 1000);
        let y = random_rational(&mut rng, 1000);
        let py = p.eval(&y);
        if py.is_zero() {
            continue;
        }
        let u = p.eval(&x) / py;
        ensure(identity_check(&fam, &x, &y, &u).unwrap(), || {
            format!("identity at ({x}, {y})")
        })?;
        checked += 1;
    }
    Ok("1000 random rows, zero failures".into())
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = s23();
    let p = yi().poly();
    let pool: Vec<Rational> = (-12..=12)
        .flat_map(|k| [1, 2, 3, 4, 6].map(|d| rat(k, d)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (mut compared, mut shared) = (0, 0);
    while compared < 1000 {
        let x = pool[rng.gen_range(0..pool.len())].clone();
        let y = if rng.gen_bool(0.2) {
            x.clone()
        } else {
            pool[rng.gen_range(0..pool.len())].clone()
        };
        let sp = share_check(&s, &p, &x, &y).map_err(|e| e.to_string())?;
        let Ok(profile) = ord_profile_equal(&s, &p, &x, &y) else {
            continue;
        };
        ensure(sp.shares == profile, || {
            format!("share_check vs profile at ({x}, {y})")
        })?;
        compared += 1;
        shared += sp.shares as usize;
    }
    let search = SearchBox {
        height_bound: 30,
        exp_bound: 1,
        max_pairs: u64::MAX,
    };
    let found = search_shared_pairs(&s, &p, &search).map_err(|e| e.to_string())?;
    for pt in &found {
        let (cx, cy) = (
            counting(&s, &p.eval(&pt.x)).unwrap(),
            counting(&s, &p.eval(&pt.y)).unwrap(),
        );
        ensure(cx.value() == cy.value(), || {
            format!("kernel at ({}, {})", pt.x, pt.y)
        })?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "1000 pairs agree ({shared} sharing); {} searched pairs have equal counting values",
        found.len()
    ))
}

/// Monic gcd by the Euclidean algorithm on coefficient vectors.
fn oracle_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    fn trim(v: &mut Vec<Rational>) {
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
    }
    fn rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut r = a.to_vec();
        trim(&mut r);
        let lb = b.last().unwrap().clone();
        while r.len() >= b.len() {
            let f = r.last().unwrap() / &lb;
            let shift = r.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                r[i + shift] -= &f * c;
            }
            r.pop();
            trim(&mut r);
        }
        r
    }
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    let l = x.last().unwrap().clone();
    x.iter().map(|c| c / &l).collect()
}

fn criterion_5() -> Check {
    let s23 = s23();
    let s237 = SContext::with_primes(&[2, 3, 7]).unwrap();
    let fam = |n, m, a: Rational, b: Rational| YiFamily::new(n, m, a, b).unwrap();
    let accepted = yi_validate(&s23, &fam(7, 1, int(1), int(1)));
    ensure(accepted.overall, || "(7,1,1,1) rejected".into())?;
    let gap = yi_validate(&s23, &fam(6, 1, int(1), int(1)));
    ensure(!gap.overall && !gap.degree_gap.pass, || {
        "(6,1,1,1) not rejected on degree gap".into()
    })?;
    let coprime = yi_validate(&s23, &fam(8, 2, int(1), int(1)));
    ensure(!coprime.overall && !coprime.coprime.pass, || {
        "(8,2,1,1) not rejected on gcd".into()
    })?;
    let b_unit = yi_validate(&s23, &fam(7, 1, int(1), rat(1, 5)));
    ensure(!b_unit.overall && !b_unit.b_s_unit.pass, || {
        "(7,1,1,1/5) not rejected on b".into()
    })?;
    let b = -parse_rational("46656/823543").unwrap();
    let f = fam(7, 1, int(1), b);
    let rep = yi_validate(&s237, &f);
    ensure(!rep.overall && !rep.squarefree.pass, || {
        "(7,1,1,-6^6/7^7) not rejected on disc".into()
    })?;
    let p = f.poly();
    ensure(discriminant(&p).unwrap().is_zero(), || {
        "discriminant nonzero".into()
    })?;
    let g = oracle_gcd(p.coeffs(), p.derivative().coeffs());
    ensure(g.len() >= 2, || "independent gcd(P, P') is constant".into())?;
    // The repeated root is -6/7.
    ensure(g == vec![rat(6, 7), int(1)], || {
        format!("gcd(P, P') = {g:?}")
    })?;
    Ok("accepts (7,1,1,1); rejects the four failing families; gcd(P,P') = X + 6/7".into())
}

fn criterion_6() -> Check {
    let s = s23();
    let sols = unit_equation_solutions(&s, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let units = [
        int(1),
        int(-1),
        int(2),
        rat(1, 3),
        int(-6),
        rat(4, 9),
        rat(-3, 8),
    ];
    let eps = rat(1, 10);
    let mut rows_checked = 0;
    for _ in 0..100 {
        let pair = &sols[rng.gen_range(0..sols.len())];
        let a = units[rng.gen_range(0..units.len())].clone();
        let b = units[rng.gen_range(0..units.len())].clone();
        let c = units[rng.gen_range(0..units.len())].clone();
        // A·x + B·y = C with x = C·u/A, y = C·v/B.
        let x = &c * &pair.u / &a;
        let y = &c * &pair.v / &b;
        let rows = corollary_eval(&s, &a, &b, &c, &eps, &[PairInput { x, y }])
            .map_err(|e| e.to_string())?;
        for r in &rows {
            ensure(r.error.is_none(), || format!("row error {:?}", r.error))?;
            let (d, g) = (r.direct.as_ref().unwrap(), r.delegated.as_ref().unwrap());
            ensure(
                d.verdict == g.verdict && d.rhs == g.rhs && d.height_x == g.max_height && r.agree,
                || {
                    format!(
                        "routes differ at ({}, {}) for A={a}, B={b}, C={c}",
                        r.x, r.y
                    )
                },
            )?;
            rows_checked += 1;
        }
    }
    Ok(format!("{rows_checked} rows identical on both routes"))
}

fn criterion_7() -> Check {
    let s = s23();
    let sys = LinearFormSystem::from_i64s(1, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    let pts = vec![vec![int(81), int(-80)], vec![int(5), int(-4)]];
    let reps = evaluate_conjecture(&s, &sys, &rat(1, 10), &pts, PointMode::Normalize)
        .map_err(|e| e.to_string())?;
    let r = &reps[0];
    ensure(*r.max_height.value() == BigUint::from(81u32), || {
        format!("max height {}", r.max_height)
    })?;
    ensure(
        r.rhs.as_ref().map(|m| m.value().clone()) == Some(BigUint::from(5u32)),
        || format!("rhs {:?}", r.rhs),
    )?;
    ensure(r.verdict == PointVerdict::Violated, || {
        format!("(81,-80) verdict {:?}", r.verdict)
    })?;
    ensure(reps[1].verdict == PointVerdict::Holds, || {
        format!("(5,-4) verdict {:?}", reps[1].verdict)
    })?;
    Ok("(81,-80): height 81, rhs 5, violated; (5,-4): holds".into())
}

fn criterion_8() -> Check {
    let s = s23();
    let got: BTreeSet<(Rational, Rational)> = unit_equation_solutions(&s, 4)
        .into_iter()
        .map(|p| (p.u, p.v))
        .collect();
    let smooth = |mut n: i64| -> Option<(u32, u32)> {
        let (mut a, mut b) = (0, 0);
        while n % 2 == 0 {
            n /= 2;
            a += 1;
        }
        while n % 3 == 0 {
            n /= 3;
            b += 1;
        }
        (n == 1).then_some((a, b))
    };
    let limit = 81 * 16;
    let mut oracle = BTreeSet::new();
    for num in 1..=limit {
        for den in 1..=limit {
            if num.gcd(&den) != 1 {
                continue;
            }
            let (Some((n2, n3)), Some((d2, d3))) = (smooth(num), smooth(den)) else {
                continue;
            };
            if n2.max(d2) > 4 || n3.max(d3) > 4 {
                continue;
            }
            for sign in [1, -1] {
                let vn = den - sign * num;
                if vn != 0 && smooth(vn.abs()).is_some() {
                    oracle.insert((rat(sign * num, den), rat(vn, den)));
                }
            }
        }
    }
    ensure(got == oracle, || {
        format!(
            "enumerator has {} solutions, oracle {}; first difference {:?}",
            got.len(),
            oracle.len(),
            got.symmetric_difference(&oracle).next()
        )
    })?;
    let within_bound = |x: &Rational| [2u64, 3].iter().all(|&p| ord(p, x).unwrap().abs() <= 4);
    for (u, v) in &got {
        ensure(
            got.contains(&(v.clone(), u.clone())) || !within_bound(v),
            || format!("swap of ({u}, {v})"),
        )?;
        let (iu, iv) = (u.recip(), -(v / u));
        ensure(
            got.contains(&(iu.clone(), iv.clone())) || !within_bound(&iu),
            || format!("inversion of ({u}, {v})"),
        )?;
    }
    for (u, v) in [(int(2), int(-1)), (int(9), int(-8)), (rat(1, 2), rat(1, 2))] {
        ensure(got.contains(&(u.clone(), v.clone())), || {
            format!("missing ({u}, {v})")
        })?;
    }
    Ok(format!(
        "{} solutions equal the brute-force oracle; closed under both symmetries",
        got.len()
    ))
}

fn criterion_9() -> Check {
    let s = s23();
    let p = yi().poly();
    let found = strong_uniqueness_search(&s, &p, &int(1), &SearchBox::integers(20))
        .map_err(|e| e.to_string())?;
    let got: BTreeSet<(Rational, Rational)> = found
        .iter()
        .map(|pr| (pr.x.clone(), pr.y.clone()))
        .collect();
    let ev = |t: i128| t.pow(7) + t.pow(6) + 1;
    let mut oracle = BTreeSet::new();
    for x in -20i128..=20 {
        for y in -20i128..=20 {
            if x != y && ev(x) == ev(y) {
                oracle.insert((int(x as i64), int(y as i64)));
            }
        }
    }
    ensure(got == oracle, || {
        format!("search {got:?}, oracle {oracle:?}")
    })?;
    ensure(
        got.contains(&(int(0), int(-1))) && got.contains(&(int(-1), int(0))),
        || "missing (0,-1)".into(),
    )?;
    ensure(
        got.iter()
            .all(|(x, y)| got.contains(&(y.clone(), x.clone()))),
        || "not symmetric".into(),
    )?;
    ensure(found.len() == got.len(), || "duplicates in output".into())?;
    Ok(format!(
        "{} off-diagonal pairs, equal to the double-loop oracle",
        got.len()
    ))
}

const LN_BITS: usize = 320;

/// `atanh(z)` for `z = num/den` in fixed point with `LN_BITS` fractional bits.
fn fixed_atanh(num: &BigInt, den: &BigInt) -> BigInt {
    let one = BigInt::one() << LN_BITS;
    let z = (&one * num) / den;
    let z2 = (&z * &z) >> LN_BITS;
    let mut term = z.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u32;
    while !term.is_zero() {
        sum += &term / k;
        term = (&term * &z2) >> LN_BITS;
        k += 2;
    }
    sum
}

/// `ln m` in fixed point.
fn fixed_ln(m: &BigUint) -> BigInt {
    let ln2 = fixed_atanh(&BigInt::one(), &BigInt::from(3)) * 2;
    let k = m.bits() - 1;
    let pk = BigInt::one() << k;
    let mi = BigInt::from(m.clone());
    ln2 * BigInt::from(k) + fixed_atanh(&(&mi - &pk), &(&mi + &pk)) * 2
}

fn oracle_cmp(a: &ScaledLog, b: &ScaledLog) -> Option<std::cmp::Ordering> {
    // c_a·ln A − c_b·ln B scaled by the product of denominators.
    let lhs = fixed_ln(a.base.value()) * a.coefficient.numer() * b.coefficient.denom();
    let rhs = fixed_ln(b.base.value()) * b.coefficient.numer() * a.coefficient.denom();
    let diff = lhs - rhs;
    // 50 significant decimal digits below the scale.
    let tol = BigInt::one() << (LN_BITS - 170);
    if diff.abs() < tol {
        None
    } else {
        Some(if diff.is_positive() {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Less
        })
    }
}

fn criterion_10() -> Check {
    use std::cmp::Ordering;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sl = |c: Rational, m: BigUint| ScaledLog::new(c, Magnitude::new(m).unwrap()).unwrap();
    let mut undecided = 0;
    for i in 0..10_000 {
        let (a, b) = if i % 4 == 0 {
            // Near ties: c·log(M^k ± 1) against c·k·log M.
            let m: u64 = rng.gen_range(2..1000);
            let k: u32 = rng.gen_range(1..6);
            let c = rat(rng.gen_range(1..30), rng.gen_range(1..30));
            let big = BigUint::from(m).pow(k);
            let off = if rng.gen_bool(0.5) {
                &big + 1u32
            } else {
                &big - 1u32
            };
            if off.is_zero() {
                continue;
            }
            (sl(c.clone(), off), sl(c * int(k as i64), BigUint::from(m)))
        } else {
            let ca = rat(rng.gen_range(0..60), rng.gen_range(1..60));
            let cb = rat(rng.gen_range(0..60), rng.gen_range(1..60));
            let ma = BigUint::from(rng.gen_range(1u64..u64::MAX)) >> rng.gen_range(0usize..63);
            let mb = BigUint::from(rng.gen_range(1u64..u64::MAX)) >> rng.gen_range(0usize..63);
            (
                sl(ca, ma.max(BigUint::one())),
                sl(cb, mb.max(BigUint::one())),
            )
        };
        let exact = cmp_scaled(&a, &b);
        match oracle_cmp(&a, &b) {
            Some(o) => ensure(o == exact, || {
                format!("instance {i}: exact {exact:?}, oracle {o:?}")
            })?,
            None => {
                undecided += 1;
                ensure(
                    exact == Ordering::Equal || a.coefficient.is_zero() || b.coefficient.is_zero(),
                    || format!("instance {i}: oracle tie, exact {exact:?}"),
                )?;
            }
        }
    }
    let ties = [
        (
            sl(int(1), BigUint::from(8u32)),
            sl(int(3), BigUint::from(2u32)),
        ),
        (
            sl(rat(1, 2), BigUint::from(9u32)),
            sl(int(1), BigUint::from(3u32)),
        ),
        (
            sl(rat(2, 3), BigUint::from(1000u32)),
            sl(int(2), BigUint::from(10u32)),
        ),
        (sl(int(0), BigUint::from(7u32)), sl(int(5), BigUint::one())),
    ];
    for (a, b) in &ties {
        ensure(cmp_scaled(a, b) == Ordering::Equal, || {
            format!("tie {a:?} vs {b:?}")
        })?;
        ensure(oracle_cmp(a, b).is_none(), || {
            "oracle misses a constructed tie".into()
        })?;
    }
    Ok(format!("10000 instances agree with the 50-digit oracle ({undecided} oracle ties, all exact ties); constructed ties Equal"))
}

fn criterion_11() -> Check {
    let dir = std::env::temp_dir().join(format!("urs-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = |name: &str, body: &str| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    };
    let pairs = file(
        "pairs.json",
        r#"[{"x":"0","y":"-1"},{"x":"2","y":"2"},{"x":"-1","y":"0"},{"x":"5","y":"5"}]"#,
    );
    let forms = file(
        "forms.json",
        r#"{"r":1,"forms":[["1","0"],["0","1"],["1","1"]]}"#,
    );
    let points = file(
        "points.json",
        r#"[["81","-80"],["5","-4"],["1","1"],["7","0"]]"#,
    );
    let cor = file(
        "cor.json",
        r#"[{"x":"2","y":"-1"},{"x":"9","y":"-8"},{"x":"1/2","y":"1/2"}]"#,
    );
    let fam = ["--n", "7", "--m", "1", "--a", "1", "--b", "1"];
    let runs: Vec<Vec<String>> = [
        vec!["validate-poly"]
            .into_iter()
            .chain(fam)
            .collect::<Vec<_>>(),
        vec!["share", "--pairs", &pairs, "--threshold", "3"]
            .into_iter()
            .chain(fam)
            .collect(),
        vec!["trace", "--pairs", &pairs]
            .into_iter()
            .chain(fam)
            .collect(),
        vec!["subspace", "--forms", &forms, "--points", &points],
        vec!["subspace", "--corollary", "1,1,1", "--pairs", &cor],
        vec!["unit-eq", "--bound", "4"],
        vec!["search-shared", "--height", "30", "--exp", "1"]
            .into_iter()
            .chain(fam)
            .collect(),
        vec!["search-su", "--height", "20"]
            .into_iter()
            .chain(fam)
            .collect(),
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let threads = std::thread::available_parallelism()
        .map_or(4, |n| n.get())
        .max(4);
    for args in &runs {
        let outputs: Vec<Option<String>> = [1, threads]
            .iter()
            .map(|w| {
                let w = w.to_string();
                let mut full = vec![
                    "urs",
                    "--s",
                    "2,3",
                    "--epsilon",
                    "1/10",
                    "--workers",
                    &w,
                    "--format",
                    "json",
                ];
                full.extend(args.iter().map(String::as_str));
                urs::cli::run(full).json
            })
            .collect();
        ensure(outputs[0].is_some(), || {
            format!("{} produced no report", args[0])
        })?;
        ensure(outputs[0] == outputs[1], || {
            format!("{} differs between 1 and {threads} workers", args[0])
        })?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{} runs byte-identical with 1 and {threads} workers",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("product-formula reconstruction", criterion_1),
        ("counting-function algebra", criterion_2),
        ("auxiliary identity", criterion_3),
        ("sharing kernel", criterion_4),
        ("family validation", criterion_5),
        ("corollary route equivalence", criterion_6),
        ("worked defect fixture", criterion_7),
        ("unit-equation enumerator", criterion_8),
        ("strong-uniqueness search", criterion_9),
        ("exact comparator", criterion_10),
        ("determinism across workers", criterion_11),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{secs:.2}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.2}s]: {why}", i + 1);
            }
        }
    }
    let elapsed = total.elapsed();
    let in_time = elapsed < Duration::from_secs(300);
    println!(
        "total {:.2}s ({}), {} of {} criteria passed",
        elapsed.as_secs_f64(),
        if in_time { "within 300s" } else { "over 300s" },
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 || !in_time {
        std::process::exit(1);
    }
}
