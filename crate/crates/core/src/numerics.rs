//! Exact numbers of the form `r + c·ε`, where `r` and `c` are arbitrary
//! precision rationals and `ε` is a formal positive infinitesimal.
//!
//! Every item size and profit in the adversary games is carried as an
//! [`EpsRational`]. Only addition, subtraction and scaling by a plain rational
//! are provided: the constructions never multiply two ε-terms, so the value
//! set stays closed and every comparison is exact.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary precision rational, always stored in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed rational {0:?}")]
    Rational(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("expected one or two rationals, got {0:?}")]
    Fields(String),
}

/// Shorthand for a small rational `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders a rational as `num/den`, the wire format used in certificates.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    let bad = || ParseError::Rational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<BigInt>().map_err(|_| bad())?,
            d.trim().parse::<BigInt>().map_err(|_| bad())?,
        ),
        None => (s.parse::<BigInt>().map_err(|_| bad())?, BigInt::one()),
    };
    if d.is_zero() {
        return Err(ParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(n, d))
}

/// Lossy conversion for human-readable columns only.
pub fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// `serde(with = ...)` adapter writing a [`Rational`] as a `"num/den"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// `std + inf·ε`. Ordering is lexicographic on `(std, inf)`.
#[derive(Clone, Default)]
pub struct EpsRational {
    std: Rational,
    inf: Rational,
}

/// Exact rational comparison by cross-multiplication.
///
/// `Ratio`'s own `Ord` avoids overflow with a division loop, which is very
/// slow on nearly equal values with long dyadic denominators (as produced by
/// adaptive sizing). Denominators of reduced big ratios are positive.
pub fn cmp_rational(x: &Rational, y: &Rational) -> Ordering {
    if x.denom() == y.denom() {
        return x.numer().cmp(y.numer());
    }
    if let (Some(tx), Some(ty)) = (power_of_two(x.denom()), power_of_two(y.denom())) {
        // Dyadic values: align by shifting instead of multiplying.
        return if tx < ty {
            (x.numer() << (ty - tx)).cmp(y.numer())
        } else {
            x.numer().cmp(&(y.numer() << (tx - ty)))
        };
    }
    (x.numer() * y.denom()).cmp(&(y.numer() * x.denom()))
}

fn power_of_two(d: &BigInt) -> Option<u64> {
    let tz = d.trailing_zeros()?;
    (d.bits() == tz + 1).then_some(tz)
}

fn same_rational(x: &Rational, y: &Rational) -> bool {
    // Both sides are reduced, so equality is structural. `Ratio`'s own `eq`
    // goes through its slow ordering.
    x.numer() == y.numer() && x.denom() == y.denom()
}

impl PartialEq for EpsRational {
    fn eq(&self, other: &Self) -> bool {
        same_rational(&self.std, &other.std) && same_rational(&self.inf, &other.inf)
    }
}

impl Eq for EpsRational {}

impl Hash for EpsRational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for part in [&self.std, &self.inf] {
            part.numer().hash(state);
            part.denom().hash(state);
        }
    }
}

impl Ord for EpsRational {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_rational(&self.std, &other.std).then_with(|| cmp_rational(&self.inf, &other.inf))
    }
}

impl PartialOrd for EpsRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl EpsRational {
    pub fn new(std: Rational, inf: Rational) -> Self {
        // BigRational reduces on construction, so the pair is canonical.
        EpsRational { std, inf }
    }

    /// The plain rational `r` (no ε component).
    pub fn real(std: Rational) -> Self {
        EpsRational::new(std, Rational::zero())
    }

    /// `n/d + c_n/c_d · ε` from machine integers.
    pub fn from_parts(n: i64, d: i64, c_n: i64, c_d: i64) -> Self {
        EpsRational::new(rat(n, d), rat(c_n, c_d))
    }

    pub fn zero() -> Self {
        EpsRational::default()
    }

    pub fn one() -> Self {
        EpsRational::real(Rational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        EpsRational::real(int(n))
    }

    /// The infinitesimal `c·ε`.
    pub fn eps(c: Rational) -> Self {
        EpsRational::new(Rational::zero(), c)
    }

    pub fn std(&self) -> &Rational {
        &self.std
    }

    pub fn inf(&self) -> &Rational {
        &self.inf
    }

    /// The ε → 0 limit.
    pub fn standard_part(&self) -> Rational {
        self.std.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.std.is_zero() && self.inf.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        *self > EpsRational::zero()
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        EpsRational::new(&self.std * factor, &self.inf * factor)
    }

    pub fn scale_int(&self, factor: i64) -> Self {
        self.scale(&int(factor))
    }

    pub fn midpoint(&self, other: &EpsRational) -> Self {
        EpsRational::new(half_sum(&self.std, &other.std), half_sum(&self.inf, &other.inf))
    }

    /// Substitutes a concrete positive `ε`.
    pub fn evaluate(&self, eps: &Rational) -> Rational {
        &self.std + &self.inf * eps
    }

    /// Smallest integer `m` with `m ≥ self`.
    pub fn ceil(&self) -> BigInt {
        let c = self.std.ceil();
        if self.std.is_integer() && self.inf.is_positive() {
            c.to_integer() + 1
        } else {
            c.to_integer()
        }
    }

    /// Largest integer `m` with `m ≤ self`.
    pub fn floor(&self) -> BigInt {
        let f = self.std.floor();
        if self.std.is_integer() && self.inf.is_negative() {
            f.to_integer() - 1
        } else {
            f.to_integer()
        }
    }
}

impl fmt::Debug for EpsRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.std, self.inf)
    }
}

impl fmt::Display for EpsRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inf.is_zero() {
            return write!(f, "{}", self.std);
        }
        let sign = if self.inf.is_negative() { '-' } else { '+' };
        let mag = self.inf.abs();
        if self.std.is_zero() {
            if self.inf.is_negative() {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{} {} ", self.std, sign)?;
        }
        if mag.is_one() {
            write!(f, "ε")
        } else {
            write!(f, "{}ε", mag)
        }
    }
}

/// Parses `"a/b"` or `"a/b c/d"` (standard part, then ε coefficient).
impl FromStr for EpsRational {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        match fields.as_slice() {
            [std] => Ok(EpsRational::real(parse_rational(std)?)),
            [std, inf] => Ok(EpsRational::new(parse_rational(std)?, parse_rational(inf)?)),
            _ => Err(ParseError::Fields(s.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    std: String,
    inf: String,
}

impl Serialize for EpsRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            std: format_rational(&self.std),
            inf: format_rational(&self.inf),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EpsRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let std = parse_rational(&w.std).map_err(serde::de::Error::custom)?;
        let inf = parse_rational(&w.inf).map_err(serde::de::Error::custom)?;
        Ok(EpsRational::new(std, inf))
    }
}

// Offsets and many sizes have a zero component; skipping the gcd for those
// matters once ε-coefficients carry thousands of bits.
fn add_parts(x: &Rational, y: &Rational) -> Rational {
    if y.is_zero() {
        x.clone()
    } else if x.is_zero() {
        y.clone()
    } else {
        dyadic_sum(x, y, 0).unwrap_or_else(|| x + y)
    }
}

/// `(x + y) / 2`, exact.
fn half_sum(x: &Rational, y: &Rational) -> Rational {
    dyadic_sum(x, y, 1).unwrap_or_else(|| (x + y) / int(2))
}

/// `(x + y) / 2^extra` when both denominators are powers of two.
///
/// Reduction only strips common factors of two, skipping the general gcd
/// that dominates bisection on long dyadic coefficients.
fn dyadic_sum(x: &Rational, y: &Rational, extra: u64) -> Option<Rational> {
    let tx = power_of_two(x.denom())?;
    let ty = power_of_two(y.denom())?;
    let t = tx.max(ty);
    let n = (x.numer() << (t - tx)) + (y.numer() << (t - ty));
    let t = t + extra;
    let Some(tz) = n.trailing_zeros() else {
        return Some(Rational::zero());
    };
    let s = tz.min(t);
    // An odd numerator (or unit denominator) over a power of two is reduced.
    Some(Rational::new_raw(n >> s, BigInt::one() << (t - s)))
}

fn sub_parts(x: &Rational, y: &Rational) -> Rational {
    if y.is_zero() {
        x.clone()
    } else if x.is_zero() {
        -y
    } else {
        x - y
    }
}

impl<'a> Add<&'a EpsRational> for &'a EpsRational {
    type Output = EpsRational;
    fn add(self, rhs: &'a EpsRational) -> EpsRational {
        EpsRational::new(add_parts(&self.std, &rhs.std), add_parts(&self.inf, &rhs.inf))
    }
}

impl Add for EpsRational {
    type Output = EpsRational;
    fn add(self, rhs: EpsRational) -> EpsRational {
        &self + &rhs
    }
}

impl<'a> Sub<&'a EpsRational> for &'a EpsRational {
    type Output = EpsRational;
    fn sub(self, rhs: &'a EpsRational) -> EpsRational {
        EpsRational::new(sub_parts(&self.std, &rhs.std), sub_parts(&self.inf, &rhs.inf))
    }
}

impl Sub for EpsRational {
    type Output = EpsRational;
    fn sub(self, rhs: EpsRational) -> EpsRational {
        &self - &rhs
    }
}

impl AddAssign<&EpsRational> for EpsRational {
    fn add_assign(&mut self, rhs: &EpsRational) {
        if !rhs.std.is_zero() {
            self.std += &rhs.std;
        }
        if !rhs.inf.is_zero() {
            self.inf += &rhs.inf;
        }
    }
}

impl SubAssign<&EpsRational> for EpsRational {
    fn sub_assign(&mut self, rhs: &EpsRational) {
        if !rhs.std.is_zero() {
            self.std -= &rhs.std;
        }
        if !rhs.inf.is_zero() {
            self.inf -= &rhs.inf;
        }
    }
}

impl Neg for EpsRational {
    type Output = EpsRational;
    fn neg(self) -> EpsRational {
        EpsRational::new(-self.std, -self.inf)
    }
}

impl<'a> Mul<&'a Rational> for &'a EpsRational {
    type Output = EpsRational;
    fn mul(self, rhs: &'a Rational) -> EpsRational {
        self.scale(rhs)
    }
}

impl<'a> Sum<&'a EpsRational> for EpsRational {
    fn sum<I: Iterator<Item = &'a EpsRational>>(iter: I) -> Self {
        iter.fold(EpsRational::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl Sum for EpsRational {
    fn sum<I: Iterator<Item = EpsRational>>(iter: I) -> Self {
        iter.fold(EpsRational::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

/// Lexicographic comparison; identical to `Ord::cmp`, named for call sites
/// that read better as a free function.
pub fn compare(x: &EpsRational, y: &EpsRational) -> Ordering {
    x.cmp(y)
}
