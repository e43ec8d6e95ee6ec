//! Test-side oracles. Everything here is computed with `BigRational` from hand
//! derived closed forms or by brute force; nothing calls into the library's
//! arithmetic.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use reordered::Dyadic;

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow2(k: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::one() << k.unsigned_abs());
    if k >= 0 {
        base
    } else {
        base.recip()
    }
}

/// `m / 2^e` read straight off the mantissa and exponent.
pub fn dyadic_value(d: &Dyadic) -> BigRational {
    BigRational::new(d.mantissa().clone(), BigInt::one() << d.exponent())
}

pub fn sum_exponents(values: &[u64]) -> BigRational {
    values.iter().map(|&v| pow2(-(v as i64))).sum()
}

/// `Σ_{k≥m} k^j 2^(-k)` for `j ≤ 3`, from the generating function of `k^j x^k`
/// at `x = 1/2`:
///
/// - `j = 0`: `2^(1-m)`
/// - `j = 1`: `(m + 1) 2^(1-m)`
/// - `j = 2`: `(m² + 2m + 3) 2^(1-m)`
/// - `j = 3`: `(m³ + 3m² + 9m + 13) 2^(1-m)`
pub fn power_tail(j: u32, m: u64) -> BigRational {
    let m = m as i64;
    let poly = match j {
        0 => 1,
        1 => m + 1,
        2 => m * m + 2 * m + 3,
        3 => m * m * m + 3 * m * m + 9 * m + 13,
        _ => panic!("power_tail supports j <= 3"),
    };
    q(poly) * pow2(1 - m)
}

/// `Σ_{k≥m} p(k) 2^(-k)` for `p(k) = Σ coeffs[j] k^j`, `deg p ≤ 3`.
pub fn poly_tail(coeffs: &[BigRational], m: u64) -> BigRational {
    coeffs.iter().enumerate().map(|(j, c)| c * power_tail(j as u32, m)).sum()
}

/// Brute-force `Σ_{k=m}^{m+terms-1} p(k) 2^(-k)`, used to sanity check `power_tail`.
pub fn poly_partial(coeffs: &[BigRational], m: u64, terms: u64) -> BigRational {
    (m..m + terms)
        .map(|k| {
            let pk: BigRational =
                coeffs.iter().enumerate().map(|(j, c)| c * q(k as i64).pow(j as i32)).sum();
            pk * pow2(-(k as i64))
        })
        .sum()
}

/// Multiplicity counts of a finite list.
pub fn counts(values: &[u64]) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for &v in values {
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

/// `Σ_{k≥p} 2^(-f*(k))` for a sorted name given by `cum(v) = Σ_{n<v} u(n)` and
/// `grouped(v) = Σ_{n≥v} u(n) 2^(-n)`.
pub fn sorted_tail(cum: &dyn Fn(u64) -> u128, grouped: &dyn Fn(u64) -> BigRational, p: u64) -> BigRational {
    let p = p as u128;
    // least v with cum(v + 1) > p
    let mut hi = 1u64;
    while cum(hi + 1) <= p {
        hi *= 2;
    }
    let mut lo = 0u64;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cum(mid + 1) > p {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let remaining = cum(lo + 1) - p;
    BigRational::from_integer(BigInt::from(remaining)) * pow2(-(lo as i64)) + grouped(lo + 1)
}

/// Index cap for tail evaluation. Tails of non-negative series are non-increasing,
/// so `tail(min(s, CAP))` still bounds `tail(s)` from above while keeping the
/// exact rationals small when a certificate saturates.
pub const TAIL_INDEX_CAP: u64 = 1 << 14;

/// Checks a modulus table against an exact tail: `s` non-decreasing and
/// `tail(s(n)) ≤ 2^(-n)` for every `n ≤ up_to`.
pub fn check_modulus(s: &dyn Fn(u64) -> u64, tail: &dyn Fn(u64) -> BigRational, up_to: u64) -> Result<(), String> {
    let mut prev = 0;
    for n in 0..=up_to {
        let sn = s(n);
        if sn < prev {
            return Err(format!("s({n}) = {sn} < s({}) = {prev}", n - 1));
        }
        prev = sn;
        let t = tail(sn.min(TAIL_INDEX_CAP));
        if t > pow2(-(n as i64)) {
            return Err(format!("tail at s({n}) = {sn} is {t}, above 2^-{n}"));
        }
    }
    Ok(())
}

/// `Σ_{l≥m} Σ_{k≤l} 2^(-(k+1)) 2^(-(l-k+1)) = ¼ Σ_{l≥m} (l+1) 2^(-l)`.
pub fn linear_product_diagonal_tail(m: u64) -> BigRational {
    (power_tail(1, m) + power_tail(0, m)) / q(4)
}

/// `u_h(n) = Σ_{a+b=n} u_f(a) u_g(b)`.
pub fn convolution(uf: &[u64], ug: &[u64], n: usize) -> u64 {
    (0..=n).map(|a| uf.get(a).copied().unwrap_or(0) * ug.get(n - a).copied().unwrap_or(0)).sum()
}

/// `⌊value^(1/n) · 2^bits⌋` by brute force on a widening search.
pub fn root_floor(value: &BigUint, n: u32, bits: u32) -> BigUint {
    let scaled = value << (bits as usize * n as usize);
    let mut hi = BigUint::one();
    while hi.pow(n) <= scaled {
        hi <<= 1;
    }
    let mut lo = BigUint::zero();
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1u32;
        if mid.pow(n) <= scaled {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
