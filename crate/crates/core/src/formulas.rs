//! Closed-form `opt(p^s, f2)`.
//!
//! Write `f2 = p^t * g` with `g` a unit. Then
//!
//! * `t` infinite or odd: `opt(p, 0)`;
//! * `t >= 2` even: `max(opt(p, 0), opt(p^(s-t), g))`;
//! * `t = 0`, `g` a square: `p^r` when `s = 2r`, `opt(p, 1) * p^r` when
//!   `s = 2r + 1`;
//! * `t = 0`, `g` a non-square: `opt(p, n)` for `p >= 5`; for `p = 3` it is
//!   infinite when `s = 1` and 5 otherwise.
//!
//! The three modulus-`p` constants `opt(p, 0)`, `opt(p, n)` and `opt(p, 1)`
//! have no closed form; they come from exhaustive search at modulus `p` and
//! are cached per prime.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::arith::{is_odd_prime, least_non_residue, qr_mod_p, unit_cofactor, ExtOrder, Limits, PrimePowerModulus, Residue};
use crate::error::{Error, Result};
use crate::search::{ml_opt, OptValue, SearchTables};

/// `opt` values at the prime modulus `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseConstants {
    pub p: u64,
    /// `opt(p, 0)`.
    pub opt_linear: OptValue,
    /// `opt(p, n)` for the least non-residue `n`.
    pub opt_nonsquare: OptValue,
    /// `opt(p, 1)`.
    pub opt_unit_square: OptValue,
    pub least_non_residue: u64,
}

fn cache() -> &'static RwLock<HashMap<u64, BaseConstants>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, BaseConstants>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub fn base_constants(p: u64) -> Result<BaseConstants> {
    base_constants_limited(p, &Limits::default())
}

/// Memoized per prime. Concurrent first calls may both compute; they
/// produce the same value, so whichever insert lands last is harmless.
pub fn base_constants_limited(p: u64, limits: &Limits) -> Result<BaseConstants> {
    if let Some(c) = cache().read().expect("base constant cache poisoned").get(&p) {
        return Ok(*c);
    }
    let c = compute_base_constants(p, limits)?;
    cache()
        .write()
        .expect("base constant cache poisoned")
        .entry(p)
        .or_insert(c);
    Ok(c)
}

/// Computes the constants by search, bypassing the cache.
pub fn compute_base_constants(p: u64, limits: &Limits) -> Result<BaseConstants> {
    let modulus = PrimePowerModulus::with_cap(p, 1, limits.max_modulus)?;
    let tables = SearchTables::build(modulus, limits)?;
    let n = least_non_residue(p);
    let opt = |f2: u64| -> Result<OptValue> { Ok(ml_opt(&tables, modulus.residue(f2 as i64))?.opt()) };
    let constants = BaseConstants {
        p,
        opt_linear: opt(0)?,
        opt_nonsquare: opt(n)?,
        opt_unit_square: opt(1)?,
        least_non_residue: n,
    };
    if p == 3 && !constants.opt_nonsquare.is_infinite() {
        return Err(Error::Inconsistent(format!(
            "search gives opt(3, 2) = {}, expected inf",
            constants.opt_nonsquare
        )));
    }
    Ok(constants)
}

/// A deliberate corruption of one branch, used to check that the
/// verification harness can fail.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Adds one to the odd-order branch.
    OddOrderOffByOne,
}

pub fn formula_opt(modulus: PrimePowerModulus, f2: Residue) -> Result<OptValue> {
    formula_opt_with(modulus, f2, &Limits::default(), None)
}

pub fn formula_opt_limited(modulus: PrimePowerModulus, f2: Residue, limits: &Limits) -> Result<OptValue> {
    formula_opt_with(modulus, f2, limits, None)
}

#[doc(hidden)]
pub fn formula_opt_with(
    modulus: PrimePowerModulus,
    f2: Residue,
    limits: &Limits,
    fault: Option<Fault>,
) -> Result<OptValue> {
    if f2.modulus() != modulus {
        return Err(Error::InvalidInput(format!(
            "f2 is reduced modulo {}, not {}",
            f2.modulus().modulus(),
            modulus.modulus()
        )));
    }
    let p = modulus.p();
    let s = modulus.s();
    let base = base_constants_limited(p, limits)?;
    let (t2, g2) = unit_cofactor(f2);
    let value = match t2 {
        ExtOrder::Infinity => base.opt_linear,
        ExtOrder::Finite(t) if t % 2 == 1 => match fault {
            Some(Fault::OddOrderOffByOne) => base.opt_linear.successor(),
            None => base.opt_linear,
        },
        ExtOrder::Finite(0) => {
            let r = s / 2;
            if qr_mod_p(g2.value(), p) {
                if s % 2 == 0 {
                    OptValue::Finite(p.pow(r))
                } else {
                    base.opt_unit_square.times(p.pow(r))
                }
            } else if p >= 5 {
                base.opt_nonsquare
            } else if s == 1 {
                OptValue::Infinite
            } else {
                OptValue::Finite(5)
            }
        }
        ExtOrder::Finite(_) => {
            // g2 already lives modulo p^(s - t2)
            let inner = formula_opt_with(g2.modulus(), g2, limits, fault)?;
            base.opt_linear.max(inner)
        }
    };
    Ok(value)
}

/// `p^((s - t2) / 2)`, the optimal bound when `s` and `t2` are positive
/// even, `t2 < s` and `f2 / p^t2` is a unit square.
pub fn corollary_opt(p: u64, s: u32, t2: u32) -> Result<OptValue> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if s == 0 || t2 == 0 || s % 2 != 0 || t2 % 2 != 0 || t2 >= s {
        return Err(Error::InvalidInput(format!(
            "need positive even s and t2 with t2 < s, got s = {s}, t2 = {t2}"
        )));
    }
    p.checked_pow((s - t2) / 2)
        .map(OptValue::Finite)
        .ok_or_else(|| Error::InvalidInput("p^((s - t2) / 2) overflows".into()))
}

/// Whether `opt(p^s, f2)` is infinite: `p = 3`, `f2 = 3^t * g` with `t`
/// even, `s = t + 1` and `g = 2 mod 3`.
pub fn predicts_infinite(modulus: PrimePowerModulus, f2: Residue) -> bool {
    if modulus.p() != 3 {
        return false;
    }
    match unit_cofactor(f2) {
        (ExtOrder::Finite(t), g) => t % 2 == 0 && modulus.s() == t + 1 && g.value() % 3 == 2,
        (ExtOrder::Infinity, _) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::Length;

    fn md(p: u64, s: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, s).unwrap()
    }

    #[test]
    fn base_constants_at_three_and_five() {
        let c3 = base_constants(3).unwrap();
        assert_eq!(c3.opt_nonsquare, Length::Infinite);
        assert_eq!(c3.least_non_residue, 2);
        let c5 = base_constants(5).unwrap();
        assert!(c5.opt_linear <= Length::Finite(4));
        let t = SearchTables::build(md(5, 1), &Limits::default()).unwrap();
        assert_eq!(c5.opt_unit_square, ml_opt(&t, md(5, 1).residue(1)).unwrap().opt());
        // cached value is stable
        assert_eq!(base_constants(5).unwrap(), c5);
        assert_eq!(compute_base_constants(5, &Limits::default()).unwrap(), c5);
    }

    #[test]
    fn linear_constant_bound() {
        for p in [3u64, 5, 7, 11, 13, 17, 19] {
            let c = base_constants(p).unwrap();
            assert!(c.opt_linear <= Length::Finite((p + 3) / 2), "p={p}");
        }
    }

    #[test]
    fn formula_examples() {
        let m = md(5, 4);
        assert_eq!(formula_opt(m, m.residue(25)).unwrap(), Length::Finite(5));
        let m = md(3, 3);
        assert_eq!(formula_opt(m, m.residue(2)).unwrap(), Length::Finite(5));
        assert_eq!(formula_opt(m, m.residue(18)).unwrap(), Length::Infinite);
        let m = md(7, 2);
        assert_eq!(formula_opt(m, m.residue(0)).unwrap(), base_constants(7).unwrap().opt_linear);
        let m = md(3, 1);
        assert_eq!(formula_opt(m, m.residue(2)).unwrap(), Length::Infinite);
    }

    #[test]
    fn formula_rejects_foreign_residue() {
        assert!(matches!(
            formula_opt(md(3, 2), md(3, 3).residue(1)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn corollary_examples() {
        assert_eq!(corollary_opt(5, 4, 2).unwrap(), Length::Finite(5));
        assert_eq!(corollary_opt(3, 4, 2).unwrap(), Length::Finite(3));
        assert!(matches!(corollary_opt(7, 2, 0), Err(Error::InvalidInput(_))));
        assert!(matches!(corollary_opt(7, 3, 2), Err(Error::InvalidInput(_))));
        assert!(matches!(corollary_opt(7, 4, 4), Err(Error::InvalidInput(_))));
        assert!(matches!(corollary_opt(9, 4, 2), Err(Error::NotOddPrime(9))));
    }

    #[test]
    fn corollary_matches_formula() {
        for p in [3u64, 5, 7] {
            for s in [2u32, 4, 6] {
                let m = md(p, s);
                for t2 in (2..s).step_by(2) {
                    for g in (1..p).filter(|&g| qr_mod_p(g, p)) {
                        let f2 = m.residue((p.pow(t2) * g) as i64);
                        assert_eq!(formula_opt(m, f2).unwrap(), corollary_opt(p, s, t2).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn depends_only_on_order_and_character() {
        for (p, s) in [(3, 4), (5, 3), (7, 3)] {
            let m = md(p, s);
            let mut seen: HashMap<(ExtOrder, bool), OptValue> = HashMap::new();
            for f2 in 0..m.modulus() {
                let r = m.residue(f2 as i64);
                let (t, g) = crate::arith::unit_part(r);
                let key = (t, qr_mod_p(g.value(), p));
                let v = formula_opt(m, r).unwrap();
                assert_eq!(*seen.entry(key).or_insert(v), v, "p={p} s={s} f2={f2}");
            }
        }
    }

    #[test]
    fn finite_for_primes_at_least_five() {
        for (p, s) in [(5, 1), (5, 2), (5, 5), (7, 4), (11, 3)] {
            let m = md(p, s);
            for f2 in 0..m.modulus().min(2000) {
                assert!(!formula_opt(m, m.residue(f2 as i64)).unwrap().is_infinite());
            }
        }
    }

    #[test]
    fn infinite_exactly_where_predicted() {
        for s in 1..=6 {
            let m = md(3, s);
            for f2 in 0..m.modulus() {
                let r = m.residue(f2 as i64);
                assert_eq!(formula_opt(m, r).unwrap().is_infinite(), predicts_infinite(m, r), "s={s} f2={f2}");
            }
        }
    }

    #[test]
    fn fault_changes_odd_branch() {
        let m = md(5, 2);
        let l = Limits::default();
        let clean = formula_opt_with(m, m.residue(5), &l, None).unwrap();
        let bad = formula_opt_with(m, m.residue(5), &l, Some(Fault::OddOrderOffByOne)).unwrap();
        assert_ne!(clean, bad);
        assert_eq!(
            formula_opt_with(m, m.residue(1), &l, Some(Fault::OddOrderOffByOne)).unwrap(),
            formula_opt(m, m.residue(1)).unwrap()
        );
    }
}
