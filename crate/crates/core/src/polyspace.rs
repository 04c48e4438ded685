//! Quadratic polynomials over `Z/p^sZ` and the decision whether such a
//! polynomial is the square of a polynomial.

use std::collections::HashSet;
use std::fmt;

use crate::arith::{padic_ord, Limits, PrimePowerModulus, Residue};
use crate::error::{Error, Result};

/// `f2*x^2 + f1*x + f0` with canonical coefficients modulo `p^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadPoly {
    modulus: PrimePowerModulus,
    f2: u64,
    f1: u64,
    f0: u64,
}

impl QuadPoly {
    pub fn new(modulus: PrimePowerModulus, f2: i64, f1: i64, f0: i64) -> Self {
        QuadPoly {
            modulus,
            f2: modulus.reduce(f2),
            f1: modulus.reduce(f1),
            f0: modulus.reduce(f0),
        }
    }

    pub(crate) fn from_canonical(modulus: PrimePowerModulus, f2: u64, f1: u64, f0: u64) -> Self {
        debug_assert!(f2 < modulus.modulus() && f1 < modulus.modulus() && f0 < modulus.modulus());
        QuadPoly { modulus, f2, f1, f0 }
    }

    pub fn from_residues(f2: Residue, f1: Residue, f0: Residue) -> Result<Self> {
        let modulus = f2.modulus();
        for r in [f1, f0] {
            if r.modulus() != modulus {
                return Err(Error::ModulusMismatch {
                    expected: modulus.modulus(),
                    found: r.modulus().modulus(),
                });
            }
        }
        Ok(QuadPoly {
            modulus,
            f2: f2.value(),
            f1: f1.value(),
            f0: f0.value(),
        })
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.modulus
    }

    /// Coefficients as `[f2, f1, f0]`.
    pub fn coefficients(&self) -> [u64; 3] {
        [self.f2, self.f1, self.f0]
    }

    pub fn f2(&self) -> Residue {
        self.modulus.residue(self.f2 as i64)
    }

    pub fn f1(&self) -> Residue {
        self.modulus.residue(self.f1 as i64)
    }

    pub fn f0(&self) -> Residue {
        self.modulus.residue(self.f0 as i64)
    }

    /// `c * f` coefficientwise.
    pub fn scale(&self, c: u64) -> QuadPoly {
        let m = self.modulus.modulus();
        let c = c % m;
        QuadPoly {
            modulus: self.modulus,
            f2: self.f2 * c % m,
            f1: self.f1 * c % m,
            f0: self.f0 * c % m,
        }
    }

    /// Value at a canonical point `x < m`.
    #[inline]
    pub fn eval_canonical(&self, x: u64) -> u64 {
        let m = self.modulus.modulus();
        ((self.f2 * x % m) * x + self.f1 * x + self.f0) % m
    }

    pub fn eval(&self, x: i64) -> Residue {
        let x = self.modulus.reduce(x);
        self.modulus.residue(self.eval_canonical(x) as i64)
    }

    fn check_modulus(&self, other: PrimePowerModulus) -> Result<()> {
        if self.modulus != other {
            return Err(Error::ModulusMismatch {
                expected: other.modulus(),
                found: self.modulus.modulus(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for QuadPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x^2 + {}x + {} (mod {})",
            self.f2,
            self.f1,
            self.f0,
            self.modulus.modulus()
        )
    }
}

pub fn eval(f: &QuadPoly, x: i64) -> Residue {
    f.eval(x)
}

/// All coefficient triples `(a^2, 2ab, b^2)` modulo `m`, i.e. the squares of
/// polynomials of degree at most one.
#[derive(Debug, Clone)]
pub struct LinearSquareIndex {
    modulus: PrimePowerModulus,
    triples: HashSet<u64>,
}

impl LinearSquareIndex {
    pub fn build(modulus: PrimePowerModulus, limits: &Limits) -> Result<Self> {
        limits.check_index(modulus)?;
        let m = modulus.modulus();
        let mut triples = HashSet::with_capacity((m * m / 2) as usize);
        for a in 0..m {
            let aa = a * a % m;
            let two_a = 2 * a % m;
            for b in 0..m {
                triples.insert(Self::key(m, aa, two_a * b % m, b * b % m));
            }
        }
        Ok(LinearSquareIndex { modulus, triples })
    }

    #[inline]
    fn key(m: u64, a: u64, b: u64, c: u64) -> u64 {
        (a * m + b) * m + c
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Membership of the canonical triple `(f2, f1, f0)`.
    #[inline]
    pub fn contains(&self, f2: u64, f1: u64, f0: u64) -> bool {
        self.triples
            .contains(&Self::key(self.modulus.modulus(), f2, f1, f0))
    }
}

pub fn build_linear_square_index(modulus: PrimePowerModulus, limits: &Limits) -> Result<LinearSquareIndex> {
    LinearSquareIndex::build(modulus, limits)
}

pub fn is_square_of_linear(f: &QuadPoly, idx: &LinearSquareIndex) -> Result<bool> {
    f.check_modulus(idx.modulus)?;
    Ok(idx.contains(f.f2, f.f1, f.f0))
}

/// Whether `f` is congruent to `phi^2` for some polynomial `phi` of any
/// degree.
///
/// Either the constant term strictly dominates in p-adic order and is a
/// square, or `f` is the square of a polynomial of degree at most one.
pub fn is_square_poly(f: &QuadPoly, idx: &LinearSquareIndex) -> Result<bool> {
    f.check_modulus(idx.modulus)?;
    Ok(is_square_poly_unchecked(f, idx))
}

#[inline]
pub(crate) fn is_square_poly_unchecked(f: &QuadPoly, idx: &LinearSquareIndex) -> bool {
    let modulus = f.modulus;
    let dominant = modulus.ord(f.f0) < modulus.ord(f.f1).min(modulus.ord(f.f2));
    (dominant && modulus.is_square(f.f0)) || idx.contains(f.f2, f.f1, f.f0)
}

/// Square roots of `y` modulo `m`, by enumeration.
fn square_roots(modulus: PrimePowerModulus, y: u64) -> Vec<u64> {
    let m = modulus.modulus() as u128;
    (0..m as u64).filter(|&a| (a as u128 * a as u128) % m == y as u128).collect()
}

/// Same decision as [`is_square_poly`] without a prebuilt index, in
/// `O(m)` time. Suited to one-off queries at large moduli.
pub fn is_square_poly_direct(f: &QuadPoly) -> bool {
    let modulus = f.modulus;
    let dominant = modulus.ord(f.f0) < modulus.ord(f.f1).min(modulus.ord(f.f2));
    if dominant && modulus.is_square(f.f0) {
        return true;
    }
    if !modulus.is_square(f.f2) || !modulus.is_square(f.f0) {
        return false;
    }
    let m = modulus.modulus() as u128;
    let roots2 = square_roots(modulus, f.f2);
    let roots0 = square_roots(modulus, f.f0);
    roots2
        .iter()
        .any(|&a| roots0.iter().any(|&b| (2 * a as u128 * b as u128) % m == f.f1 as u128))
}

/// Whether the constant term's order is strictly below both other orders.
pub fn constant_term_dominates(f: &QuadPoly) -> bool {
    let ord0 = padic_ord(f.f0());
    ord0 < padic_ord(f.f1()).min(padic_ord(f.f2()))
}

/// Default enumeration budget for the bounded square oracle: `27^5`,
/// enough for `m <= 27` with degree bound 4.
pub const DEFAULT_ORACLE_BUDGET: u128 = 14_348_907;

/// Default degree bound for the square oracle.
pub const DEFAULT_ORACLE_DEGREE: usize = 4;

/// Searches for `phi` of degree at most `degree_bound` with `phi^2 == f`
/// coefficientwise modulo `m`. Returns the coefficients of `phi` in
/// increasing degree.
///
/// The search space is every coefficient vector in `[0, m)^(d+1)`; a prefix
/// `c_0..c_k` is abandoned as soon as the degree-`k` coefficient of the
/// square (which depends only on that prefix) disagrees with `f`.
pub fn square_root_bounded(f: &QuadPoly, degree_bound: usize, budget: u128) -> Result<Option<Vec<u64>>> {
    let m = f.modulus.modulus();
    let needed = (m as u128).checked_pow(degree_bound as u32 + 1).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let target = |k: usize| -> u64 {
        match k {
            0 => f.f0,
            1 => f.f1,
            2 => f.f2,
            _ => 0,
        }
    };
    let mut coeffs = vec![0u64; degree_bound + 1];
    if extend_root(&mut coeffs, 0, m, &target) {
        Ok(Some(coeffs))
    } else {
        Ok(None)
    }
}

fn square_coefficient(coeffs: &[u64], k: usize, m: u64) -> u64 {
    let d = coeffs.len() - 1;
    let lo = k.saturating_sub(d);
    let hi = k.min(d);
    let mut acc = 0u64;
    for i in lo..=hi {
        acc = (acc + coeffs[i] * coeffs[k - i]) % m;
    }
    acc
}

fn extend_root(coeffs: &mut Vec<u64>, k: usize, m: u64, target: &dyn Fn(usize) -> u64) -> bool {
    let d = coeffs.len() - 1;
    if k > d {
        return (d + 1..=(2 * d).max(2)).all(|j| {
            let c = if j <= 2 * d { square_coefficient(coeffs, j, m) } else { 0 };
            c == target(j)
        });
    }
    for c in 0..m {
        coeffs[k] = c;
        // coefficient k of phi^2 only involves c_0..c_k
        let partial: u64 = (0..=k).fold(0, |acc, i| (acc + coeffs[i] * coeffs[k - i]) % m);
        if partial == target(k) && extend_root(coeffs, k + 1, m, target) {
            return true;
        }
    }
    coeffs[k] = 0;
    false
}

pub fn oracle_is_square_poly_bounded(f: &QuadPoly, degree_bound: usize) -> Result<bool> {
    Ok(square_root_bounded(f, degree_bound, DEFAULT_ORACLE_BUDGET)?.is_some())
}

/// Degree of a coefficient vector in increasing order; `None` for zero.
pub fn degree_of(coeffs: &[u64]) -> Option<usize> {
    coeffs.iter().rposition(|&c| c != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn md(p: u64, s: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, s).unwrap()
    }

    fn index(p: u64, s: u32) -> LinearSquareIndex {
        build_linear_square_index(md(p, s), &Limits::default()).unwrap()
    }

    #[test]
    fn direct_matches_index() {
        for (p, s) in [(3, 1), (3, 2), (3, 3), (5, 2), (7, 1)] {
            let m = md(p, s);
            let idx = index(p, s);
            let n = m.modulus() as i64;
            for f2 in 0..n {
                for f1 in 0..n {
                    for f0 in 0..n {
                        let f = QuadPoly::new(m, f2, f1, f0);
                        assert_eq!(is_square_poly_direct(&f), is_square_poly(&f, &idx).unwrap(), "{f}");
                    }
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let f = QuadPoly::new(md(5, 4), 25, 0, 125);
        assert_eq!(f.eval(1).value(), 150);
        let c = QuadPoly::new(md(7, 2), 0, 0, 11);
        for x in -20..20 {
            assert_eq!(c.eval(x).value(), 11);
        }
        assert_eq!(QuadPoly::new(md(3, 2), 1, 2, 1).eval(2).value(), 0);
        assert_eq!(QuadPoly::new(md(3, 2), 1, 2, 1).eval(-7).value(), 0);
    }

    #[test]
    fn linear_index_examples() {
        let idx3 = index(3, 1);
        assert!(idx3.contains(1, 2, 1));
        assert!(!idx3.contains(2, 0, 0));

        let idx9 = index(3, 2);
        let brute = (0..9u64).any(|a| (0..9u64).any(|b| a * a % 9 == 0 && 2 * a * b % 9 == 3 && b * b % 9 == 7));
        assert_eq!(idx9.contains(0, 3, 7), brute);
        // (3x + 5)^2 = 9x^2 + 30x + 25
        assert!(brute);
    }

    #[test]
    fn linear_square_examples() {
        let idx = index(3, 3);
        let m = md(3, 3);
        assert!(is_square_of_linear(&QuadPoly::new(m, 1, 2, 1), &idx).unwrap());
        assert!(is_square_of_linear(&QuadPoly::new(m, 0, 0, 4), &idx).unwrap());
        let big = index(5, 4);
        assert!(!is_square_of_linear(&QuadPoly::new(md(5, 4), 25, 0, 125), &big).unwrap());
    }

    #[test]
    fn modulus_mismatch() {
        let idx = index(3, 2);
        let f = QuadPoly::new(md(3, 3), 1, 2, 1);
        assert!(matches!(is_square_of_linear(&f, &idx), Err(Error::ModulusMismatch { .. })));
        assert!(matches!(is_square_poly(&f, &idx), Err(Error::ModulusMismatch { .. })));
    }

    #[test]
    fn square_poly_examples() {
        let big = index(5, 4);
        assert!(!is_square_poly(&QuadPoly::new(md(5, 4), 25, 0, 125), &big).unwrap());
        let idx = index(3, 3);
        let f = QuadPoly::new(md(3, 3), 9, 3, 1);
        assert!(is_square_poly(&f, &idx).unwrap());
        assert!(oracle_is_square_poly_bounded(&f, 4).unwrap());
        assert!(is_square_poly(&QuadPoly::new(md(3, 3), 0, 0, 0), &idx).unwrap());
        // nonzero square constant is caught by the dominance branch
        assert!(is_square_poly(&QuadPoly::new(md(3, 3), 0, 0, 7), &idx).unwrap());
    }

    #[test]
    fn oracle_examples() {
        let f = QuadPoly::new(md(3, 2), 1, 2, 1);
        let root = square_root_bounded(&f, 1, DEFAULT_ORACLE_BUDGET).unwrap().unwrap();
        assert_eq!(degree_of(&root), Some(1));
        assert!(!oracle_is_square_poly_bounded(&QuadPoly::new(md(3, 1), 0, 0, 2), 3).unwrap());
        let root = square_root_bounded(&QuadPoly::new(md(3, 3), 9, 3, 1), 4, DEFAULT_ORACLE_BUDGET)
            .unwrap()
            .unwrap();
        // verify phi^2 == f directly
        let m = 27u64;
        let mut sq = vec![0u64; 9];
        for i in 0..5 {
            for j in 0..5 {
                sq[i + j] = (sq[i + j] + root[i] * root[j]) % m;
            }
        }
        assert_eq!(&sq[..3], &[1, 3, 9]);
        assert!(sq[3..].iter().all(|&c| c == 0));
    }

    #[test]
    fn oracle_budget() {
        let f = QuadPoly::new(md(5, 3), 1, 0, 0);
        assert!(matches!(
            oracle_is_square_poly_bounded(&f, 4),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn oracle_degree_zero() {
        let m = md(5, 1);
        assert!(square_root_bounded(&QuadPoly::new(m, 0, 0, 4), 0, 100).unwrap().is_some());
        assert!(square_root_bounded(&QuadPoly::new(m, 0, 1, 4), 0, 100).unwrap().is_none());
        assert!(square_root_bounded(&QuadPoly::new(m, 1, 0, 0), 0, 100).unwrap().is_none());
    }

    #[test]
    fn unit_leading_coefficient_needs_linear_root() {
        for (p, s) in [(3, 2), (5, 2), (3, 3)] {
            let modulus = md(p, s);
            let idx = index(p, s);
            let m = modulus.modulus();
            for f2 in (0..m).filter(|x| x % p != 0) {
                for f1 in 0..m {
                    for f0 in 0..m {
                        let f = QuadPoly::from_canonical(modulus, f2, f1, f0);
                        assert!(!constant_term_dominates(&f));
                        assert_eq!(is_square_poly(&f, &idx).unwrap(), is_square_of_linear(&f, &idx).unwrap());
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn unit_square_scaling_preserves_triviality(
            f2 in 0u64..25, f1 in 0u64..25, f0 in 0u64..25, c in 1u64..25,
        ) {
            prop_assume!(c % 5 != 0);
            let modulus = md(5, 2);
            let idx = index(5, 2);
            let f = QuadPoly::from_canonical(modulus, f2, f1, f0);
            let g = f.scale(c * c);
            prop_assert_eq!(is_square_poly(&f, &idx).unwrap(), is_square_poly(&g, &idx).unwrap());
        }
    }
}
