//! Exhaustive search for the longest non-trivial Büchi sequences.
//!
//! A polynomial `f` mod `m` gives a Büchi sequence of length `N` when
//! `f(1), ..., f(N)` are all squares mod `m`. The sequence is non-trivial
//! when `f` is not the square of a polynomial. Since `f` is periodic with
//! period `m`, all of `f(1..=m)` being squares means every value is a
//! square and the length is infinite.

use std::cmp::Ordering;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{character, least_non_residue, unit_part, Limits, PrimePowerModulus, Residue, SquareTable};
use crate::error::{Error, Result};
use crate::formulas;
use crate::polyspace::{is_square_poly_unchecked, LinearSquareIndex, QuadPoly};
use crate::record::{OutputRecord, Witness};

/// A sequence length or bound; `Infinite` sorts above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Length {
    Finite(u64),
    Infinite,
}

/// Optimal bounds share the representation of lengths.
pub type OptValue = Length;

impl Length {
    pub fn successor(self) -> Length {
        match self {
            Length::Finite(n) => Length::Finite(n + 1),
            Length::Infinite => Length::Infinite,
        }
    }

    /// Inverse of [`Length::successor`]; `None` for `Finite(0)`.
    pub fn predecessor(self) -> Option<Length> {
        match self {
            Length::Finite(0) => None,
            Length::Finite(n) => Some(Length::Finite(n - 1)),
            Length::Infinite => Some(Length::Infinite),
        }
    }

    /// Multiplication by a positive integer; `Infinite` absorbs.
    pub fn times(self, k: u64) -> Length {
        match self {
            Length::Finite(n) => Length::Finite(n * k),
            Length::Infinite => Length::Infinite,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Length::Finite(n) => Some(n),
            Length::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Length::Infinite
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(n) => write!(f, "{n}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Length {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => Ok(Length::Infinite),
            t => t
                .parse::<u64>()
                .map(Length::Finite)
                .map_err(|_| Error::InvalidInput(format!("not a length: {s:?}"))),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Length::Finite(n) => serializer.serialize_u64(*n),
            Length::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct LengthVisitor;

        impl Visitor<'_> for LengthVisitor {
            type Value = Length;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Length, E> {
                Ok(Length::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Length, E> {
                u64::try_from(v)
                    .map(Length::Finite)
                    .map_err(|_| E::custom("negative length"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Length, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(LengthVisitor)
    }
}

/// The square table and linear-square index for one modulus, built once
/// and shared read-only by every search at that modulus.
#[derive(Debug, Clone)]
pub struct SearchTables {
    modulus: PrimePowerModulus,
    squares: SquareTable,
    index: LinearSquareIndex,
}

impl SearchTables {
    pub fn build(modulus: PrimePowerModulus, limits: &Limits) -> Result<Self> {
        let squares = SquareTable::build(modulus, limits)?;
        let index = LinearSquareIndex::build(modulus, limits)?;
        Ok(SearchTables {
            modulus,
            squares,
            index,
        })
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.modulus
    }

    pub fn squares(&self) -> &SquareTable {
        &self.squares
    }

    pub fn index(&self) -> &LinearSquareIndex {
        &self.index
    }

    fn check(&self, r: Residue) -> Result<u64> {
        if r.modulus() != self.modulus {
            return Err(Error::ModulusMismatch {
                expected: self.modulus.modulus(),
                found: r.modulus().modulus(),
            });
        }
        Ok(r.value())
    }
}

/// Result of maximizing over a family of polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub length: Length,
    pub witness: Option<QuadPoly>,
    pub trivial_only: bool,
}

impl SearchOutcome {
    pub fn opt(&self) -> OptValue {
        self.length.successor()
    }

    fn trivial() -> Self {
        SearchOutcome {
            length: Length::Finite(0),
            witness: None,
            trivial_only: true,
        }
    }

    /// Larger length wins; ties go to the lexicographically smaller
    /// `(f1, f0)` of the witness.
    fn better_than(&self, other: &SearchOutcome) -> bool {
        match (self.witness, other.witness) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(a), Some(b)) => match self.length.cmp(&other.length) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    let [_, a1, a0] = a.coefficients();
                    let [_, b1, b0] = b.coefficients();
                    (a1, a0) < (b1, b0)
                }
            },
        }
    }

    fn merge(self, other: SearchOutcome) -> SearchOutcome {
        if other.better_than(&self) {
            other
        } else {
            self
        }
    }
}

/// Length of the Büchi sequence of `f`: the largest `N` with
/// `f(1), ..., f(N)` all squares, or `Infinite` if `f(1..=m)` are.
pub fn buchi_length(f: &QuadPoly, tbl: &SquareTable) -> Result<Length> {
    if f.modulus() != tbl.modulus() {
        return Err(Error::ModulusMismatch {
            expected: tbl.modulus().modulus(),
            found: f.modulus().modulus(),
        });
    }
    let [f2, f1, f0] = f.coefficients();
    Ok(run_length(tbl, f2, f1, f0))
}

/// Walks `f(1), f(2), ...` by finite differences:
/// `f(x+1) - f(x) = f2*(2x+1) + f1`, which grows by `2*f2` per step.
#[inline]
fn run_length(tbl: &SquareTable, f2: u64, f1: u64, f0: u64) -> Length {
    let m = tbl.modulus().modulus();
    let step = 2 * f2 % m;
    let mut value = (f2 + f1 + f0) % m;
    let mut diff = (3 * f2 + f1) % m;
    for n in 0..m {
        if !tbl.contains(value) {
            return Length::Finite(n);
        }
        value += diff;
        if value >= m {
            value -= m;
        }
        diff += step;
        if diff >= m {
            diff -= m;
        }
    }
    Length::Infinite
}

/// Number of leading squares among `f(1), ..., f(horizon)` by direct
/// evaluation, with no periodicity shortcut.
pub fn square_run_within(f: &QuadPoly, horizon: u64) -> u64 {
    let modulus = f.modulus();
    (1..=horizon)
        .take_while(|&x| modulus.is_square(f.eval_canonical(x % modulus.modulus())))
        .count() as u64
}

/// Maximal non-trivial length over all `f0`, for fixed `f2` and `f1`.
pub fn ml_f1(tables: &SearchTables, f2: Residue, f1: Residue) -> Result<SearchOutcome> {
    let f2 = tables.check(f2)?;
    let f1 = tables.check(f1)?;
    Ok(ml_f1_raw(tables, f2, f1))
}

fn ml_f1_raw(tables: &SearchTables, f2: u64, f1: u64) -> SearchOutcome {
    let modulus = tables.modulus;
    let m = modulus.modulus();
    // f(x) - f0 for x = 1..=m; f0 shifts every value equally
    let mut base = Vec::with_capacity(m as usize);
    let step = 2 * f2 % m;
    let mut value = (f2 + f1) % m;
    let mut diff = (3 * f2 + f1) % m;
    for _ in 0..m {
        base.push(value);
        value = (value + diff) % m;
        diff = (diff + step) % m;
    }

    let squares = &tables.squares;
    let mut best: Option<(Length, u64)> = None;
    for f0 in 0..m {
        let length = base
            .iter()
            .position(|&v| {
                let y = v + f0;
                !squares.contains(if y >= m { y - m } else { y })
            })
            .map_or(Length::Infinite, |n| Length::Finite(n as u64));
        if matches!(best, Some((b, _)) if length <= b) {
            continue;
        }
        let f = QuadPoly::from_canonical(modulus, f2, f1, f0);
        if is_square_poly_unchecked(&f, &tables.index) {
            continue;
        }
        best = Some((length, f0));
    }
    match best {
        Some((length, f0)) => SearchOutcome {
            length,
            witness: Some(QuadPoly::from_canonical(modulus, f2, f1, f0)),
            trivial_only: false,
        },
        None => SearchOutcome::trivial(),
    }
}

/// Maximal non-trivial length over all `f1` and `f0`, for fixed `f2`.
///
/// The `f1` loop runs on the current rayon pool; the reduction is
/// independent of scheduling.
pub fn ml_opt(tables: &SearchTables, f2: Residue) -> Result<SearchOutcome> {
    let f2 = tables.check(f2)?;
    Ok(ml_opt_raw(tables, f2))
}

fn ml_opt_raw(tables: &SearchTables, f2: u64) -> SearchOutcome {
    (0..tables.modulus.modulus())
        .into_par_iter()
        .map(|f1| ml_f1_raw(tables, f2, f1))
        .reduce(SearchOutcome::trivial, SearchOutcome::merge)
}

/// Single-threaded [`ml_opt`].
pub fn ml_opt_sequential(tables: &SearchTables, f2: Residue) -> Result<SearchOutcome> {
    let f2 = tables.check(f2)?;
    Ok((0..tables.modulus.modulus())
        .map(|f1| ml_f1_raw(tables, f2, f1))
        .fold(SearchOutcome::trivial(), SearchOutcome::merge))
}

/// Which leading coefficients a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F2Selection {
    All,
    Representatives,
}

impl F2Selection {
    pub fn as_str(self) -> &'static str {
        match self {
            F2Selection::All => "all",
            F2Selection::Representatives => "representatives",
        }
    }
}

/// Leading coefficients visited under `selection`, ascending.
///
/// Representatives are `p^t * g` for every `t < s` and `g` in
/// `{1, least non-residue}`, plus zero.
pub fn select_f2(modulus: PrimePowerModulus, selection: F2Selection) -> Vec<u64> {
    match selection {
        F2Selection::All => (0..modulus.modulus()).collect(),
        F2Selection::Representatives => {
            let n = least_non_residue(modulus.p());
            let mut out: Vec<u64> = (0..modulus.s())
                .flat_map(|t| [modulus.p_pow(t), modulus.p_pow(t) * n])
                .collect();
            out.push(0);
            out.sort_unstable();
            out
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub brute: bool,
    pub formula: bool,
    pub timings: bool,
}

impl SweepOptions {
    pub fn both() -> Self {
        SweepOptions {
            brute: true,
            formula: true,
            timings: false,
        }
    }
}

/// One record per selected `f2`, in ascending `f2` order.
pub fn sweep(
    modulus: PrimePowerModulus,
    selection: F2Selection,
    options: SweepOptions,
    limits: &Limits,
) -> Result<Vec<OutputRecord>> {
    let tables = if options.brute {
        Some(SearchTables::build(modulus, limits)?)
    } else {
        limits.check_table(modulus)?;
        None
    };
    select_f2(modulus, selection)
        .into_iter()
        .map(|f2| opt_record(modulus, modulus.residue(f2 as i64), tables.as_ref(), options, limits))
        .collect()
}

/// Computes the requested engines for one `f2` and packages the result.
pub fn opt_record(
    modulus: PrimePowerModulus,
    f2: Residue,
    tables: Option<&SearchTables>,
    options: SweepOptions,
    limits: &Limits,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let (t2, _) = unit_part(f2);
    let opt_formula = if options.formula {
        Some(formulas::formula_opt_limited(modulus, f2, limits)?)
    } else {
        None
    };
    let outcome = match (options.brute, tables) {
        (true, Some(t)) => Some(ml_opt(t, f2)?),
        (true, None) => Some(ml_opt(&SearchTables::build(modulus, limits)?, f2)?),
        _ => None,
    };
    let elapsed_ms = options.timings.then(|| start.elapsed().as_millis() as u64);
    Ok(OutputRecord {
        p: modulus.p(),
        s: modulus.s(),
        modulus: modulus.modulus(),
        f2: f2.value(),
        t2,
        g2_character: character(f2),
        opt_formula,
        opt_brute: outcome.map(|o| o.opt()),
        ml: outcome.map(|o| o.length),
        witness: outcome.and_then(|o| o.witness).map(|w| {
            let [_, f1, f0] = w.coefficients();
            Witness { f1, f0 }
        }),
        trivial_only: outcome.map(|o| o.trivial_only),
        elapsed_ms,
    })
}

/// Whether `f` is the square of a polynomial, using prebuilt tables.
pub fn is_trivial(tables: &SearchTables, f: &QuadPoly) -> Result<bool> {
    crate::polyspace::is_square_poly(f, &tables.index)
}

/// `opt(p^s, f2, f1) = ml + 1` for fixed `f2`, `f1`.
pub fn opt_f1(tables: &SearchTables, f2: Residue, f1: Residue) -> Result<OptValue> {
    Ok(ml_f1(tables, f2, f1)?.opt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(p: u64, s: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, s).unwrap()
    }

    fn tables(p: u64, s: u32) -> SearchTables {
        SearchTables::build(md(p, s), &Limits::default()).unwrap()
    }

    fn oracle_length(f: &QuadPoly) -> Length {
        let m = f.modulus().modulus();
        let n = square_run_within(f, m);
        if n == m {
            Length::Infinite
        } else {
            Length::Finite(n)
        }
    }

    #[test]
    fn length_arithmetic() {
        assert_eq!(Length::Finite(3).successor(), Length::Finite(4));
        assert_eq!(Length::Infinite.successor(), Length::Infinite);
        assert_eq!(Length::Finite(7).max(Length::Infinite), Length::Infinite);
        assert_eq!(Length::Finite(2).max(Length::Finite(5)), Length::Finite(5));
        assert_eq!(Length::Finite(2).times(3), Length::Finite(6));
        assert_eq!(Length::Infinite.times(3), Length::Infinite);
        assert_eq!("inf".parse::<Length>().unwrap(), Length::Infinite);
        assert_eq!("12".parse::<Length>().unwrap(), Length::Finite(12));
        assert!("-1".parse::<Length>().is_err());
    }

    #[test]
    fn length_examples() {
        let t = tables(5, 4);
        let f = QuadPoly::new(md(5, 4), 25, 0, 125);
        assert_eq!(buchi_length(&f, t.squares()).unwrap(), Length::Finite(4));
        assert!(!t.modulus().is_square(f.eval(0).value()));
        assert!(!t.modulus().is_square(f.eval(5).value()));

        let t27 = tables(3, 3);
        assert_eq!(
            buchi_length(&QuadPoly::new(md(3, 3), 1, 0, 0), t27.squares()).unwrap(),
            Length::Infinite
        );
        for p in [3u64, 5, 7] {
            let n = least_non_residue(p);
            let tp = tables(p, 1);
            let f = QuadPoly::new(md(p, 1), 0, 0, n as i64);
            assert_eq!(buchi_length(&f, tp.squares()).unwrap(), Length::Finite(0));
        }
        assert!(matches!(
            buchi_length(&f, t27.squares()),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn finite_differences_match_direct_evaluation() {
        for (p, s) in [(3, 2), (5, 2), (3, 3)] {
            let t = tables(p, s);
            let m = t.modulus().modulus();
            for f2 in 0..m {
                for f1 in 0..m {
                    for f0 in 0..m {
                        let f = QuadPoly::from_canonical(t.modulus(), f2, f1, f0);
                        assert_eq!(buchi_length(&f, t.squares()).unwrap(), oracle_length(&f), "{f}");
                    }
                }
            }
        }
    }

    fn brute_ml_f1(t: &SearchTables, f2: u64, f1: u64) -> (Length, bool) {
        let m = t.modulus().modulus();
        let mut best: Option<Length> = None;
        for f0 in 0..m {
            let f = QuadPoly::from_canonical(t.modulus(), f2, f1, f0);
            if crate::polyspace::is_square_poly(&f, t.index()).unwrap() {
                continue;
            }
            let l = oracle_length(&f);
            best = Some(best.map_or(l, |b| b.max(l)));
        }
        best.map_or((Length::Finite(0), true), |b| (b, false))
    }

    #[test]
    fn ml_f1_matches_naive_maximum() {
        for (p, s) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)] {
            let t = tables(p, s);
            let modulus = t.modulus();
            let m = modulus.modulus();
            for f2 in 0..m {
                for f1 in 0..m {
                    let out = ml_f1(&t, modulus.residue(f2 as i64), modulus.residue(f1 as i64)).unwrap();
                    let (len, trivial_only) = brute_ml_f1(&t, f2, f1);
                    assert_eq!(out.length, len, "p={p} s={s} f2={f2} f1={f1}");
                    assert_eq!(out.trivial_only, trivial_only);
                    if let Some(w) = out.witness {
                        assert_eq!(oracle_length(&w), len);
                        assert!(!is_trivial(&t, &w).unwrap());
                        // smallest attaining f0
                        let [_, _, w0] = w.coefficients();
                        for f0 in 0..w0 {
                            let f = QuadPoly::from_canonical(modulus, f2, f1, f0);
                            assert!(is_trivial(&t, &f).unwrap() || oracle_length(&f) < len);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_leading_and_linear_coefficients() {
        for (p, s) in [(3, 2), (5, 2), (7, 1)] {
            let t = tables(p, s);
            let z = t.modulus().residue(0);
            let out = ml_f1(&t, z, z).unwrap();
            // constants: squares are trivial, non-squares have length 0
            assert_eq!(out.length, Length::Finite(0));
            assert_eq!(out.opt(), Length::Finite(1));
            let w = out.witness.unwrap();
            assert!(!t.modulus().is_square(w.coefficients()[2]));
        }
    }

    #[test]
    fn nonsquare_unit_at_three_is_infinite() {
        let t = tables(3, 1);
        let out = ml_opt(&t, md(3, 1).residue(2)).unwrap();
        assert_eq!(out.length, Length::Infinite);
    }

    #[test]
    fn linear_bound_at_five() {
        let t = tables(5, 1);
        let out = ml_f1(&t, md(5, 1).residue(0), md(5, 1).residue(1)).unwrap();
        assert!(out.length <= Length::Finite(3));
    }

    #[test]
    fn ml_opt_examples() {
        let t = tables(5, 4);
        assert_eq!(ml_opt(&t, md(5, 4).residue(25)).unwrap().length, Length::Finite(4));
        let t = tables(3, 2);
        assert_eq!(ml_opt(&t, md(3, 2).residue(2)).unwrap().opt(), Length::Finite(5));
        let t = tables(3, 3);
        assert_eq!(ml_opt(&t, md(3, 3).residue(18)).unwrap().length, Length::Infinite);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let t = tables(5, 2);
        for f2 in 0..25 {
            let r = md(5, 2).residue(f2);
            assert_eq!(ml_opt(&t, r).unwrap(), ml_opt_sequential(&t, r).unwrap());
        }
    }

    #[test]
    fn representatives() {
        assert_eq!(select_f2(md(5, 2), F2Selection::Representatives), vec![0, 1, 2, 5, 10]);
        assert_eq!(
            select_f2(md(5, 4), F2Selection::Representatives),
            vec![0, 1, 2, 5, 10, 25, 50, 125, 250]
        );
        assert_eq!(select_f2(md(3, 2), F2Selection::All).len(), 9);
    }

    #[test]
    fn sweep_records() {
        let l = Limits::default();
        let recs = sweep(md(3, 2), F2Selection::All, SweepOptions::both(), &l).unwrap();
        assert_eq!(recs.len(), 9);
        assert!(recs.windows(2).all(|w| w[0].f2 < w[1].f2));
        let recs = sweep(md(5, 2), F2Selection::Representatives, SweepOptions::both(), &l).unwrap();
        assert_eq!(recs.iter().map(|r| r.f2).collect::<Vec<_>>(), vec![0, 1, 2, 5, 10]);
        for r in &recs {
            assert_eq!(r.opt_brute, r.ml.map(Length::successor));
            assert!(r.elapsed_ms.is_none());
        }
        let tight = Limits {
            max_index_modulus: 10,
            ..Limits::default()
        };
        assert!(matches!(
            sweep(md(3, 3), F2Selection::All, SweepOptions::both(), &tight),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn intro_family_record() {
        let l = Limits::default();
        let t = tables(5, 4);
        let rec = opt_record(md(5, 4), md(5, 4).residue(25), Some(&t), SweepOptions::both(), &l).unwrap();
        assert_eq!(rec.opt_brute, Some(Length::Finite(5)));
        assert_eq!(rec.opt_formula, Some(Length::Finite(5)));
    }
}
