//! Search and closed form checked against naive enumeration that shares no
//! code with the finite-difference walk or the linear-square index.

use std::collections::HashSet;

use buchi_core::arith::{Limits, PrimePowerModulus};
use buchi_core::formulas::formula_opt;
use buchi_core::polyspace::{is_square_poly, oracle_is_square_poly_bounded, QuadPoly, DEFAULT_ORACLE_DEGREE};
use buchi_core::search::{buchi_length, ml_f1, ml_opt, Length, SearchTables};
use proptest::prelude::*;

fn squares(m: u64) -> HashSet<u64> {
    (0..m).map(|x| x * x % m).collect()
}

fn naive_length(f2: u64, f1: u64, f0: u64, m: u64, sq: &HashSet<u64>) -> Length {
    let mut n = 0;
    for x in 1..=m {
        if !sq.contains(&((f2 * x * x + f1 * x + f0) % m)) {
            return Length::Finite(n);
        }
        n += 1;
    }
    Length::Infinite
}

/// ml by exhaustive enumeration, with triviality decided by the bounded
/// square-root oracle.
fn naive_ml(modulus: PrimePowerModulus, f2: u64) -> Length {
    let m = modulus.modulus();
    let sq = squares(m);
    let mut best = Length::Finite(0);
    for f1 in 0..m {
        for f0 in 0..m {
            let len = naive_length(f2, f1, f0, m, &sq);
            if len <= best {
                continue;
            }
            let f = QuadPoly::new(modulus, f2 as i64, f1 as i64, f0 as i64);
            if !oracle_is_square_poly_bounded(&f, DEFAULT_ORACLE_DEGREE).unwrap() {
                best = len;
            }
        }
    }
    best
}

#[test]
fn ml_opt_matches_naive() {
    for (p, s) in [(3, 1), (3, 2), (5, 1), (7, 1), (11, 1)] {
        let modulus = PrimePowerModulus::new(p, s).unwrap();
        let tables = SearchTables::build(modulus, &Limits::default()).unwrap();
        for f2 in 0..modulus.modulus() {
            let r = modulus.residue(f2 as i64);
            let got = ml_opt(&tables, r).unwrap();
            assert_eq!(got.length, naive_ml(modulus, f2), "{p}^{s}, f2={f2}");
            assert_eq!(formula_opt(modulus, r).unwrap(), got.opt(), "{p}^{s}, f2={f2}");
        }
    }
}

#[test]
fn witnesses_realize_their_length() {
    let modulus = PrimePowerModulus::new(5, 2).unwrap();
    let tables = SearchTables::build(modulus, &Limits::default()).unwrap();
    let sq = squares(25);
    for f2 in 0..25 {
        let out = ml_opt(&tables, modulus.residue(f2)).unwrap();
        let w = out.witness.expect("non-trivial witness exists mod 25");
        let [a, b, c] = w.coefficients();
        assert_eq!(a, f2 as u64);
        assert_eq!(naive_length(a, b, c, 25, &sq), out.length);
        assert!(!is_square_poly(&w, tables.index()).unwrap());
    }
}

#[test]
fn square_decision_matches_oracle_mod_27_linear_slice() {
    let modulus = PrimePowerModulus::new(3, 3).unwrap();
    let tables = SearchTables::build(modulus, &Limits::default()).unwrap();
    for f2 in [0, 1, 3, 9, 18] {
        for f1 in 0..27 {
            for f0 in 0..27 {
                let f = QuadPoly::new(modulus, f2, f1, f0);
                assert_eq!(
                    is_square_poly(&f, tables.index()).unwrap(),
                    oracle_is_square_poly_bounded(&f, DEFAULT_ORACLE_DEGREE).unwrap(),
                    "{f}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn length_matches_naive(
        (p, s) in prop::sample::select(vec![(3u64, 3u32), (3, 4), (5, 2), (5, 3), (7, 2), (13, 2)]),
        f2 in any::<i64>(), f1 in any::<i64>(), f0 in any::<i64>(),
    ) {
        let modulus = PrimePowerModulus::new(p, s).unwrap();
        let tables = SearchTables::build(modulus, &Limits::default()).unwrap();
        let f = QuadPoly::new(modulus, f2, f1, f0);
        let [a, b, c] = f.coefficients();
        let m = modulus.modulus();
        prop_assert_eq!(buchi_length(&f, tables.squares()).unwrap(), naive_length(a, b, c, m, &squares(m)));
    }

    #[test]
    fn ml_f1_is_max_over_f0(f2 in 0i64..49, f1 in 0i64..49) {
        let modulus = PrimePowerModulus::new(7, 2).unwrap();
        let tables = SearchTables::build(modulus, &Limits::default()).unwrap();
        let sq = squares(49);
        let want = (0..49u64)
            .filter(|&f0| !is_square_poly(&QuadPoly::new(modulus, f2, f1, f0 as i64), tables.index()).unwrap())
            .map(|f0| naive_length(f2 as u64, f1 as u64, f0, 49, &sq))
            .max()
            .unwrap_or(Length::Finite(0));
        let got = ml_f1(&tables, modulus.residue(f2), modulus.residue(f1)).unwrap();
        prop_assert_eq!(got.length, want);
    }
}
