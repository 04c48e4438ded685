//! Residue arithmetic modulo an odd prime power `p^s`.
//!
//! Every residue is stored as its canonical representative in `[0, p^s)`.
//! The zero class is the only class of infinite p-adic order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `p^s` for moduli and square tables.
pub const DEFAULT_MAX_MODULUS: u64 = 1 << 20;

/// Default cap on `p^s` for structures that are quadratic in the modulus
/// (the linear-square index and the exhaustive searches built on it).
pub const DEFAULT_MAX_INDEX_MODULUS: u64 = 1 << 12;

/// Resource caps shared by the table builders and searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_modulus: u64,
    pub max_index_modulus: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_modulus: DEFAULT_MAX_MODULUS,
            max_index_modulus: DEFAULT_MAX_INDEX_MODULUS,
        }
    }
}

impl Limits {
    /// Defaults, with `BUCHI_MAX_MODULUS` overriding the table cap when set
    /// to a positive integer.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var("BUCHI_MAX_MODULUS")
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .filter(|&v| v > 0)
        {
            limits.max_modulus = cap;
            limits.max_index_modulus = limits.max_index_modulus.min(cap);
        }
        limits
    }

    pub fn check_table(&self, modulus: PrimePowerModulus) -> Result<()> {
        check_cap(modulus, self.max_modulus)
    }

    pub fn check_index(&self, modulus: PrimePowerModulus) -> Result<()> {
        check_cap(modulus, self.max_modulus.min(self.max_index_modulus))
    }
}

fn check_cap(modulus: PrimePowerModulus, cap: u64) -> Result<()> {
    if modulus.m > cap {
        return Err(Error::CapExceeded {
            p: modulus.p,
            s: modulus.s,
            cap,
        });
    }
    Ok(())
}

/// Trial division.
pub fn is_odd_prime(n: u64) -> bool {
    if n < 3 || n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A validated modulus `m = p^s` with `p` an odd prime and `s >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawModulus", into = "RawModulus")]
pub struct PrimePowerModulus {
    p: u64,
    s: u32,
    m: u64,
}

#[derive(Serialize, Deserialize)]
struct RawModulus {
    p: u64,
    s: u32,
}

impl TryFrom<RawModulus> for PrimePowerModulus {
    type Error = Error;

    fn try_from(raw: RawModulus) -> Result<Self> {
        PrimePowerModulus::new(raw.p, raw.s)
    }
}

impl From<PrimePowerModulus> for RawModulus {
    fn from(m: PrimePowerModulus) -> Self {
        RawModulus { p: m.p, s: m.s }
    }
}

impl PrimePowerModulus {
    /// Builds `p^s` under the default cap.
    pub fn new(p: u64, s: u32) -> Result<Self> {
        Self::with_cap(p, s, DEFAULT_MAX_MODULUS)
    }

    pub fn with_cap(p: u64, s: u32, cap: u64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if s == 0 {
            return Err(Error::ZeroExponent);
        }
        let mut m = 1u64;
        for _ in 0..s {
            m = match m.checked_mul(p) {
                Some(v) if v <= cap => v,
                _ => return Err(Error::CapExceeded { p, s, cap }),
            };
        }
        Ok(PrimePowerModulus { p, s, m })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// The modulus `p^s`.
    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// `p^k` as an integer, for `k <= s`.
    pub fn p_pow(&self, k: u32) -> u64 {
        debug_assert!(k <= self.s);
        self.p.pow(k)
    }

    /// The modulus `p^k` for `1 <= k <= s`.
    pub fn with_exponent(&self, k: u32) -> Result<PrimePowerModulus> {
        if k == 0 {
            return Err(Error::ZeroExponent);
        }
        if k > self.s {
            return Err(Error::InvalidInput(format!(
                "exponent {k} exceeds {}",
                self.s
            )));
        }
        Ok(PrimePowerModulus {
            p: self.p,
            s: k,
            m: self.p.pow(k),
        })
    }

    /// The prime modulus `p`.
    pub fn prime_field(&self) -> PrimePowerModulus {
        PrimePowerModulus {
            p: self.p,
            s: 1,
            m: self.p,
        }
    }

    /// Canonical representative of any integer.
    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.m as i64) as u64
    }

    pub fn residue(&self, x: i64) -> Residue {
        Residue {
            value: self.reduce(x),
            modulus: *self,
        }
    }

    /// p-adic order of the canonical representative `x < m`.
    pub fn ord(&self, x: u64) -> ExtOrder {
        debug_assert!(x < self.m);
        if x == 0 {
            return ExtOrder::Infinity;
        }
        let mut t = 0;
        let mut v = x;
        while v % self.p == 0 {
            v /= self.p;
            t += 1;
        }
        ExtOrder::Finite(t)
    }

    /// Whether `x < m` is a square modulo `m`.
    ///
    /// Zero is a square; otherwise `x = p^t * g` with `g` a unit is a
    /// square iff `t` is even and `g` is a quadratic residue mod `p`.
    pub fn is_square(&self, x: u64) -> bool {
        match self.ord(x) {
            ExtOrder::Infinity => true,
            ExtOrder::Finite(t) => t % 2 == 0 && qr_mod_p(x / self.p.pow(t), self.p),
        }
    }
}

impl fmt::Display for PrimePowerModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.s)
    }
}

/// A canonical residue class modulo `p^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: PrimePowerModulus,
}

impl Residue {
    pub fn new(modulus: PrimePowerModulus, x: i64) -> Self {
        modulus.residue(x)
    }

    pub fn zero(modulus: PrimePowerModulus) -> Self {
        Residue { value: 0, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// The same integer representative read modulo `p^k`, `k <= s`.
    pub fn reduce_to(&self, k: u32) -> Result<Residue> {
        let modulus = self.modulus.with_exponent(k)?;
        Ok(Residue {
            value: self.value % modulus.m,
            modulus,
        })
    }

    fn same_modulus(&self, other: &Residue) {
        assert_eq!(
            self.modulus, other.modulus,
            "residue arithmetic across different moduli"
        );
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus.m)
    }
}

impl Add for Residue {
    type Output = Residue;

    fn add(self, rhs: Residue) -> Residue {
        self.same_modulus(&rhs);
        Residue {
            value: (self.value + rhs.value) % self.modulus.m,
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;

    fn sub(self, rhs: Residue) -> Residue {
        self.same_modulus(&rhs);
        Residue {
            value: (self.value + self.modulus.m - rhs.value) % self.modulus.m,
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;

    fn mul(self, rhs: Residue) -> Residue {
        self.same_modulus(&rhs);
        Residue {
            value: self.value * rhs.value % self.modulus.m,
            modulus: self.modulus,
        }
    }
}

impl Neg for Residue {
    type Output = Residue;

    fn neg(self) -> Residue {
        Residue {
            value: (self.modulus.m - self.value) % self.modulus.m,
            modulus: self.modulus,
        }
    }
}

/// A p-adic order: finite, or infinite for the zero class.
///
/// `Infinity` sorts above every finite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtOrder {
    Finite(u32),
    Infinity,
}

impl ExtOrder {
    pub fn finite(self) -> Option<u32> {
        match self {
            ExtOrder::Finite(t) => Some(t),
            ExtOrder::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ExtOrder::Infinity
    }

    pub fn is_even_finite(self) -> bool {
        matches!(self, ExtOrder::Finite(t) if t % 2 == 0)
    }

    pub fn is_odd_finite(self) -> bool {
        matches!(self, ExtOrder::Finite(t) if t % 2 == 1)
    }
}

impl fmt::Display for ExtOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtOrder::Finite(t) => write!(f, "{t}"),
            ExtOrder::Infinity => f.write_str("inf"),
        }
    }
}

/// Quadratic character of the unit part of a residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Character {
    Zero,
    Square,
    Nonsquare,
}

impl Character {
    pub fn as_str(self) -> &'static str {
        match self {
            Character::Zero => "zero",
            Character::Square => "square",
            Character::Nonsquare => "nonsquare",
        }
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn padic_ord(x: Residue) -> ExtOrder {
    x.modulus.ord(x.value)
}

/// Splits `x = p^t * g` and reports `g` modulo `p`; `(Infinity, 0)` for zero.
pub fn unit_part(x: Residue) -> (ExtOrder, Residue) {
    let p_field = x.modulus.prime_field();
    match unit_cofactor(x) {
        (ExtOrder::Infinity, _) => (ExtOrder::Infinity, Residue::zero(p_field)),
        (t, g) => (t, Residue::new(p_field, (g.value % x.modulus.p) as i64)),
    }
}

/// Splits `x = p^t * g` with `g` reported modulo `p^(s-t)`.
///
/// For the zero class the cofactor is `0 mod p^s`.
pub fn unit_cofactor(x: Residue) -> (ExtOrder, Residue) {
    let modulus = x.modulus;
    match padic_ord(x) {
        ExtOrder::Infinity => (ExtOrder::Infinity, x),
        ExtOrder::Finite(t) => {
            let lower = modulus
                .with_exponent(modulus.s - t)
                .expect("finite order is below s");
            let g = x.value / modulus.p.pow(t);
            (
                ExtOrder::Finite(t),
                Residue {
                    value: g % lower.m,
                    modulus: lower,
                },
            )
        }
    }
}

pub fn character(x: Residue) -> Character {
    match unit_part(x) {
        (ExtOrder::Infinity, _) => Character::Zero,
        (_, g) if qr_mod_p(g.value, x.modulus.p) => Character::Square,
        _ => Character::Nonsquare,
    }
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc: u128 = 1 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Whether `u` is a square modulo the odd prime `p` (Euler's criterion;
/// zero counts as a square).
pub fn qr_mod_p(u: u64, p: u64) -> bool {
    let u = u % p;
    u == 0 || pow_mod(u, (p - 1) / 2, p) == 1
}

/// Smallest quadratic non-residue modulo the odd prime `p`.
pub fn least_non_residue(p: u64) -> u64 {
    (2..p)
        .find(|&u| !qr_mod_p(u, p))
        .expect("every odd prime has a non-residue")
}

pub fn is_square_residue(y: Residue) -> bool {
    y.modulus.is_square(y.value)
}

/// Membership table of `{ x^2 mod m : 0 <= x < m }`.
#[derive(Debug, Clone)]
pub struct SquareTable {
    modulus: PrimePowerModulus,
    squares: Vec<bool>,
}

impl SquareTable {
    pub fn build(modulus: PrimePowerModulus, limits: &Limits) -> Result<Self> {
        limits.check_table(modulus)?;
        let m = modulus.m;
        let mut squares = vec![false; m as usize];
        // x and m - x have the same square
        for x in 0..=m / 2 {
            squares[(x * x % m) as usize] = true;
        }
        Ok(SquareTable { modulus, squares })
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.modulus
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        self.squares[x as usize]
    }

    /// The squares in increasing order.
    pub fn members(&self) -> Vec<u64> {
        (0..self.modulus.m).filter(|&x| self.contains(x)).collect()
    }

    pub fn len(&self) -> usize {
        self.squares.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn square_table(modulus: PrimePowerModulus, limits: &Limits) -> Result<SquareTable> {
    SquareTable::build(modulus, limits)
}
