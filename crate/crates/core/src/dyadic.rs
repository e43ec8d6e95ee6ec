//! Exact dyadic rationals `m · 2^(-e)`.
//!
//! Every partial sum, tail bound and stage value in the crate is a [`Dyadic`].
//! Values are kept canonical: when the exponent is positive the mantissa is odd,
//! and zero is always `0/2^0`. Integers therefore carry exponent zero with an
//! arbitrary mantissa.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: u64,
}

impl Dyadic {
    /// Builds `mantissa · 2^(-exponent)` and canonicalizes it.
    pub fn new(mantissa: BigInt, exponent: u64) -> Self {
        let mut d = Dyadic { mantissa, exponent };
        d.canonicalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic::default()
    }

    pub fn one() -> Self {
        Dyadic::from_integer(1)
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Dyadic { mantissa: n.into(), exponent: 0 }
    }

    pub fn from_biguint(n: BigUint) -> Self {
        Dyadic::from_integer(BigInt::from(n))
    }

    /// `2^(-e)`, the weight of exponent `e` in a dyadic series.
    pub fn pow2_neg(e: u64) -> Self {
        Dyadic { mantissa: BigInt::one(), exponent: e }
    }

    /// `2^k` for a signed power `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Dyadic::from_integer(BigInt::one() << (k as u64))
        } else {
            Dyadic::pow2_neg(k.unsigned_abs())
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u64;
            if k <= self.exponent {
                Dyadic::new(self.mantissa.clone(), self.exponent - k)
            } else {
                Dyadic::new(&self.mantissa << (k - self.exponent), 0)
            }
        } else {
            Dyadic::new(self.mantissa.clone(), self.exponent + k.unsigned_abs())
        }
    }

    /// `self ≤ 2^(-n)`.
    pub fn le_pow2_neg(&self, n: u64) -> bool {
        *self <= Dyadic::pow2_neg(n)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.exponent)
    }

    /// Exact conversion; `None` unless the denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let denom = r.denom();
        if denom.is_negative() {
            return Dyadic::from_rational(&BigRational::new(-r.numer().clone(), -denom.clone()));
        }
        let tz = denom.trailing_zeros().unwrap_or(0);
        if (denom >> tz) != BigInt::one() {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), tz))
    }

    /// Smallest multiple of `2^(-bits)` that is `≥ r`.
    pub fn ceil_rational(r: &BigRational, bits: u64) -> Self {
        let scaled = r * BigRational::from_integer(BigInt::one() << bits);
        Dyadic::new(scaled.ceil().to_integer(), bits)
    }

    /// Rounds `r ≥ 0` up, finely enough that `r ≤ 2^(-n)` still implies
    /// `result ≤ 2^(-n)` for every `n`.
    pub fn ceil_tight(r: &BigRational) -> Self {
        if let Some(d) = Dyadic::from_rational(r) {
            return d;
        }
        let bits = (r.denom().bits() as i64 - r.numer().bits() as i64 + 2).max(0) as u64;
        Dyadic::ceil_rational(r, bits)
    }

    /// Largest multiple of `2^(-bits)` that is `≤ r`.
    pub fn floor_rational(r: &BigRational, bits: u64) -> Self {
        let scaled = r * BigRational::from_integer(BigInt::one() << bits);
        Dyadic::new(scaled.floor().to_integer(), bits)
    }

    /// Integer part, rounded toward negative infinity.
    pub fn floor(&self) -> BigInt {
        self.mantissa.div_floor(&(BigInt::one() << self.exponent))
    }

    /// `floor(self · 2^e)`.
    pub fn floor_at(&self, e: u64) -> BigInt {
        if e >= self.exponent {
            &self.mantissa << (e - self.exponent)
        } else {
            self.mantissa.div_floor(&(BigInt::one() << (self.exponent - e)))
        }
    }

    /// Scales by `2^e` and returns the mantissa when that is an integer.
    pub fn scaled_integer(&self, e: u64) -> Option<BigInt> {
        if e >= self.exponent {
            Some(&self.mantissa << (e - self.exponent))
        } else {
            None
        }
    }

    /// `floor(log2 |self|)`; `None` for zero.
    fn magnitude(&self) -> Option<i128> {
        if self.is_zero() {
            return None;
        }
        Some(self.mantissa.bits() as i128 - 1 - self.exponent as i128)
    }

    fn canonicalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        if self.exponent == 0 {
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent);
        if shift > 0 {
            self.mantissa >>= shift;
            self.exponent -= shift;
        }
    }

    fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u64) {
        let e = a.exponent.max(b.exponent);
        (&a.mantissa << (e - a.exponent), &b.mantissa << (e - b.exponent), e)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        if let (Some(ma), Some(mb)) = (self.magnitude(), other.magnitude()) {
            if ma != mb {
                let by_magnitude = ma.cmp(&mb);
                return if sa == Sign::Minus { by_magnitude.reverse() } else { by_magnitude };
            }
        }
        let (a, b, _) = Dyadic::align(self, other);
        a.cmp(&b)
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = Dyadic::align(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::align(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

macro_rules! forward_owned {
    ($Op:ident, $op:ident) => {
        impl $Op<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $op(self, rhs: Dyadic) -> Dyadic {
                (&self).$op(&rhs)
            }
        }
        impl $Op<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $op(self, rhs: &Dyadic) -> Dyadic {
                (&self).$op(rhs)
            }
        }
        impl $Op<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $op(self, rhs: Dyadic) -> Dyadic {
                self.$op(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = &*self - rhs;
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `m/2^e` (any `m`, not necessarily canonical) or a bare integer `m`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse { offset: 0, message: format!("not a dyadic literal: {s:?}") };
        let s = s.trim();
        let (m, e) = match s.split_once('/') {
            Some((m, rest)) => {
                let e = rest.trim().strip_prefix("2^").ok_or_else(bad)?;
                (m.trim(), e.trim().parse::<u64>().map_err(|_| bad())?)
            }
            None => (s, 0),
        };
        let m = m.parse::<BigInt>().map_err(|_| bad())?;
        Ok(Dyadic::new(m, e))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `Σ_{k=n}^{∞} 2^(-k) = 2^(-n+1)`.
pub fn geometric_tail(n: u64) -> Dyadic {
    Dyadic::pow2(1 - n as i64)
}

/// `Σ 2^(-e)` over a list of exponents, computed with one big-integer pass.
pub fn sum_pow2_neg(exponents: &[u64]) -> Dyadic {
    let Some(&max) = exponents.iter().max() else {
        return Dyadic::zero();
    };
    let mut counts: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
    for &e in exponents {
        *counts.entry(e).or_default() += 1;
    }
    let mut acc = BigInt::zero();
    for (e, count) in counts {
        acc += BigInt::from(count) << (max - e);
    }
    Dyadic::new(acc, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(d("1/2^1") + d("1/2^2"), d("3/2^2"));
        assert_eq!(d("3/2^3") * d("5/2^2"), d("15/2^5"));
        assert_eq!(d("7/2^3").cmp(&d("7/2^3")), Ordering::Equal);
        assert_eq!(d("1/2^1") - d("3/2^2"), d("-1/2^2"));
    }

    #[test]
    fn canonical_form() {
        let x = d("12/2^4");
        assert_eq!(x.mantissa(), &BigInt::from(3));
        assert_eq!(x.exponent(), 2);
        let z = d("0/2^9");
        assert_eq!(z.exponent(), 0);
        assert_eq!(d("8/2^2").to_string(), "2/2^0");
        assert_eq!(d("5").to_string(), "5/2^0");
    }

    #[test]
    fn geometric_tail_examples() {
        assert_eq!(geometric_tail(0), Dyadic::from_integer(2));
        assert_eq!(geometric_tail(1), Dyadic::one());
        assert_eq!(geometric_tail(5), d("1/2^4"));
        for n in 0..=64 {
            assert_eq!(geometric_tail(n) - geometric_tail(n + 1), Dyadic::pow2_neg(n));
        }
    }

    #[test]
    fn ordering_mixed_signs_and_magnitudes() {
        assert!(d("-1/2^1") < d("1/2^40"));
        assert!(d("-3/2^1") < d("-1/2^0"));
        assert!(d("1/2^100") < d("3/2^101"));
        assert!(Dyadic::zero() < d("1/2^1000"));
    }

    #[test]
    fn parse_errors() {
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("x".parse::<Dyadic>().is_err());
        assert!("1/2^-1".parse::<Dyadic>().is_err());
    }

    #[test]
    fn rational_rounding() {
        let third = BigRational::new(1.into(), 3.into());
        let up = Dyadic::ceil_rational(&third, 10);
        let down = Dyadic::floor_rational(&third, 10);
        assert!(down.to_rational() <= third && third <= up.to_rational());
        assert_eq!(up - down, Dyadic::pow2_neg(10));
        assert_eq!(Dyadic::from_rational(&third), None);
    }

    #[test]
    fn sum_of_exponents() {
        assert_eq!(sum_pow2_neg(&[2, 2, 2, 2]), Dyadic::one());
        assert_eq!(sum_pow2_neg(&[1, 2, 3]), d("7/2^3"));
        assert_eq!(sum_pow2_neg(&[]), Dyadic::zero());
    }
}
