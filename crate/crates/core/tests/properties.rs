//! Randomized invariants across modules.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;

use urs::heightfn::{cmp_scaled, counting, counting_trunc, height, LogSum, Magnitude, ScaledLog};
use urs::polyring::{resultant, RatPoly, YiFamily};
use urs::qsarith::{
    factor, format_rational, int, is_s_unit, ord, parse_rational, rat, unit_equation_solutions,
    Rational, SContext, DEFAULT_FACTORING_BUDGET,
};
use urs::sharing::{search_shared_pairs, share_check, SearchBox};
use urs::subspace::{evaluate_conjecture, LinearFormSystem, PointMode, PointVerdict};
use urs::yitrace::{
    dependence_detect, identity_check, strong_uniqueness_search, trace_row, trunc_bound_check,
    TraceRow,
};

fn s23() -> SContext {
    SContext::with_primes(&[2, 3]).unwrap()
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (-100_000i64..=100_000, 1i64..=100_000)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| rat(n, d))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-100_000i64..=100_000, 1i64..=100_000).prop_map(|(n, d)| rat(n, d))
}

fn s_integer() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 0u32..3, 0u32..2).prop_map(|(k, a, b)| rat(k, 2i64.pow(a) * 3i64.pow(b)))
}

fn small_poly() -> impl Strategy<Value = RatPoly> {
    prop::collection::vec((-9i64..=9, 1i64..=3), 1..5).prop_map(|cs| {
        let mut c: Vec<Rational> = cs.into_iter().map(|(n, d)| rat(n, d)).collect();
        let last = c.len() - 1;
        if c[last].is_zero() {
            c[last] = int(1);
        }
        RatPoly::new(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rational_strings_round_trip(x in rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn factorization_multiplies_back(n in 1u64..10_000_000_000) {
        let f = factor(&BigUint::from(n), DEFAULT_FACTORING_BUDGET).unwrap();
        prop_assert_eq!(f.value(), BigInt::from(n));
    }

    #[test]
    fn valuation_is_additive(x in nonzero_rational(), y in nonzero_rational(), p in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
        prop_assert_eq!(ord(p, &(&x * &y)).unwrap(), ord(p, &x).unwrap() + ord(p, &y).unwrap());
    }

    #[test]
    fn height_is_invariant_under_sign_and_inversion(x in nonzero_rational()) {
        prop_assert_eq!(height(&x), height(&-x.clone()));
        prop_assert_eq!(height(&x), height(&x.recip()));
    }

    #[test]
    fn truncation_is_monotone(x in nonzero_rational(), l in 1u32..4) {
        let s = s23();
        let lo = counting_trunc(&s, l, &x).unwrap();
        let hi = counting_trunc(&s, l + 1, &x).unwrap();
        prop_assert!(lo.divides(&hi));
        prop_assert!(hi.divides(&counting(&s, &x).unwrap()));
        prop_assert!(counting(&s, &x).unwrap() <= height(&x));
    }

    #[test]
    fn comparator_is_antisymmetric_and_scale_consistent(
        ca in 0i64..50, da in 1i64..50, ma in 1u64..1_000_000,
        cb in 0i64..50, db in 1i64..50, mb in 1u64..1_000_000, k in 1u32..4,
    ) {
        let a = ScaledLog::new(rat(ca, da), Magnitude::from_u64(ma)).unwrap();
        let b = ScaledLog::new(rat(cb, db), Magnitude::from_u64(mb)).unwrap();
        prop_assert_eq!(cmp_scaled(&a, &b), cmp_scaled(&b, &a).reverse());
        // c·log(M^k) = (c·k)·log M.
        let powered = ScaledLog::new(rat(ca, da), Magnitude::from_u64(ma).pow(k)).unwrap();
        let scaled = ScaledLog::new(rat(ca * k as i64, da), Magnitude::from_u64(ma)).unwrap();
        prop_assert_eq!(cmp_scaled(&powered, &scaled), std::cmp::Ordering::Equal);
        let sum = LogSum::new().plus(rat(ca, da), &Magnitude::from_u64(ma));
        prop_assert!(sum.at_most(&sum.clone().plus(int(1), &Magnitude::from_u64(mb))));
    }

    #[test]
    fn resultant_is_multiplicative(a in small_poly(), b in small_poly(), c in small_poly()) {
        let ab = &a * &b;
        prop_assert_eq!(
            resultant(&ab, &c).unwrap(),
            resultant(&a, &c).unwrap() * resultant(&b, &c).unwrap()
        );
    }

    #[test]
    fn auxiliary_identity_holds_for_any_family(
        n in 3u32..10, m in 1u32..3, a in nonzero_rational(), b in nonzero_rational(),
        x in rational(), y in nonzero_rational(),
    ) {
        prop_assume!(n > m);
        let fam = YiFamily::new(n, m, a, b).unwrap();
        let p = fam.poly();
        let py = p.eval(&y);
        prop_assume!(!py.is_zero());
        let u = p.eval(&x) / py;
        prop_assert!(identity_check(&fam, &x, &y, &u).unwrap());
    }

    #[test]
    fn sharing_is_symmetric_up_to_inversion(x in s_integer(), y in s_integer()) {
        let s = s23();
        let p = RatPoly::from_i64s(&[1, 0, 0, 0, 0, 0, 1, 1]);
        let xy = share_check(&s, &p, &x, &y).unwrap();
        let yx = share_check(&s, &p, &y, &x).unwrap();
        prop_assert_eq!(xy.shares, yx.shares);
        if let (Some(u), Some(v)) = (&xy.u, &yx.u) {
            if !u.is_zero() {
                prop_assert_eq!(u.recip(), v.clone());
            }
        }
    }

    #[test]
    fn verdicts_are_monotone_in_epsilon(x in 1i64..500, y in -500i64..500, e in 0i64..20) {
        prop_assume!(y != 0 && x + y != 0);
        let s = s23();
        let sys = LinearFormSystem::from_i64s(1, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let pt = vec![vec![int(x), int(y)]];
        let lo = evaluate_conjecture(&s, &sys, &rat(e, 10), &pt, PointMode::Normalize).unwrap();
        let hi = evaluate_conjecture(&s, &sys, &rat(e + 1, 10), &pt, PointMode::Normalize).unwrap();
        if lo[0].verdict == PointVerdict::Holds {
            prop_assert_eq!(hi[0].verdict, PointVerdict::Holds);
        }
    }

    #[test]
    fn verdicts_ignore_s_unit_scaling(x in 1i64..500, y in -500i64..500, a in 0u32..6, b in 0u32..4) {
        prop_assume!(y != 0 && x + y != 0);
        let s = s23();
        let sys = LinearFormSystem::from_i64s(1, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let k = int(2i64.pow(a) * 3i64.pow(b));
        let plain = vec![vec![int(x), int(y)]];
        let scaled = vec![vec![int(x) * &k, int(y) * &k]];
        let eps = rat(1, 10);
        let r1 = evaluate_conjecture(&s, &sys, &eps, &plain, PointMode::Normalize).unwrap();
        let r2 = evaluate_conjecture(&s, &sys, &eps, &scaled, PointMode::Normalize).unwrap();
        prop_assert_eq!(r1[0].verdict, r2[0].verdict);
    }

    #[test]
    fn dependence_basis_annihilates_and_shrinks(
        rows in prop::collection::vec(prop::array::uniform3(-20i64..20), 1..4),
        extra in prop::array::uniform3(-20i64..20),
    ) {
        let rows: Vec<[Rational; 3]> = rows.iter().map(|r| r.map(int)).collect();
        let base = dependence_detect(&rows);
        for v in &base.nullspace_basis {
            for r in &rows {
                let dot: Rational = (0..3).map(|i| &v[i] * &r[i]).sum();
                prop_assert!(dot.is_zero());
            }
            let first = v.iter().find(|c| !c.is_zero()).unwrap();
            prop_assert!(*first > Rational::zero());
        }
        let mut more = rows.clone();
        more.push(extra.map(int));
        prop_assert!(dependence_detect(&more).nullspace_basis.len() <= base.nullspace_basis.len());
        prop_assert_eq!(base.rank + base.nullspace_basis.len(), 3);
    }
}

#[test]
fn unit_equation_output_is_valid() {
    let s = s23();
    for bound in 0..=3 {
        for pair in unit_equation_solutions(&s, bound) {
            assert_eq!(&pair.u + &pair.v, Rational::one());
            assert!(is_s_unit(&s, &pair.u) && is_s_unit(&s, &pair.v));
            assert!(ord(2, &pair.u).unwrap().abs() <= bound as i64);
            assert!(ord(3, &pair.u).unwrap().abs() <= bound as i64);
        }
    }
}

#[test]
fn strong_uniqueness_search_swaps_with_inverse_constant() {
    let s = s23();
    let p = RatPoly::from_i64s(&[0, 1, 1]);
    let search = SearchBox {
        height_bound: 12,
        exp_bound: 1,
        max_pairs: u64::MAX,
    };
    for c in [int(2), rat(1, 3), int(-1), rat(9, 4)] {
        let at_c = strong_uniqueness_search(&s, &p, &c, &search).unwrap();
        let at_inv = strong_uniqueness_search(&s, &p, &c.recip(), &search).unwrap();
        let mut swapped: Vec<(Rational, Rational)> = at_inv
            .iter()
            .map(|pr| (pr.y.clone(), pr.x.clone()))
            .collect();
        swapped.sort();
        let mut direct: Vec<(Rational, Rational)> =
            at_c.iter().map(|pr| (pr.x.clone(), pr.y.clone())).collect();
        direct.sort();
        assert_eq!(direct, swapped, "c = {c}");
        assert!(at_c.iter().all(|pr| pr.x != pr.y));
    }
}

#[test]
fn truncated_bounds_hold_on_enumerated_shared_pairs() {
    let s = s23();
    let families = [
        YiFamily::new(7, 1, int(1), int(1)).unwrap(),
        YiFamily::new(7, 1, int(-1), int(2)).unwrap(),
        YiFamily::new(9, 2, int(3), int(-1)).unwrap(),
        YiFamily::new(7, 1, rat(9, 8), int(1)).unwrap(),
    ];
    let search = SearchBox {
        height_bound: 24,
        exp_bound: 1,
        max_pairs: u64::MAX,
    };
    for fam in &families {
        let p = fam.poly();
        let mut pairs: Vec<(Rational, Rational)> = search_shared_pairs(&s, &p, &search)
            .unwrap()
            .into_iter()
            .map(|pt| (pt.x, pt.y))
            .collect();
        pairs.extend(search.candidates(&s).into_iter().map(|x| (x.clone(), x)));
        let rows: Vec<TraceRow> = pairs
            .iter()
            .filter(|(_, y)| !p.eval(y).is_zero())
            .map(|(x, y)| trace_row(&s, fam, x, y).unwrap())
            .collect();
        assert!(rows.iter().all(|r| r.identity_ok && r.shares));
        for (r, t) in rows.iter().zip(trunc_bound_check(&s, &rows).unwrap()) {
            assert!(t.ok(), "{} at ({}, {})", p, r.x, r.y);
        }
    }
}

#[test]
fn full_trace_passes_exact_checks_on_enumerated_pairs() {
    let s = s23();
    let eps = rat(1, 10);
    for fam in [
        YiFamily::new(7, 1, int(1), int(1)).unwrap(),
        YiFamily::new(7, 1, rat(9, 8), int(1)).unwrap(),
        YiFamily::new(9, 2, int(3), int(-1)).unwrap(),
    ] {
        let p = fam.poly();
        let search = SearchBox {
            height_bound: 20,
            exp_bound: 1,
            max_pairs: u64::MAX,
        };
        let mut pairs: Vec<urs::sharing::PairInput> = search_shared_pairs(&s, &p, &search)
            .unwrap()
            .into_iter()
            .map(|pt| urs::sharing::PairInput { x: pt.x, y: pt.y })
            .collect();
        for x in [rat(55, 8), int(97), rat(-121, 6)] {
            pairs.push(urs::sharing::PairInput { x: x.clone(), y: x });
        }
        let rep = urs::yitrace::trace(&s, &fam, &eps, &pairs).unwrap();
        assert!(rep.all_exact_ok, "{p}: {:?}", rep.exact_failures);
        assert!(rep
            .main
            .rows
            .iter()
            .all(|r| r.forward.eta_height_lower && r.reversed.eta_height_lower));
    }
}
