//! Families whose infinite tails evaluate exactly.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Polynomial;
use super::Multiplicity;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::Name;

fn pow2_rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::one() << n)
}

/// A weight sequence `f` with a closed-form tail `Σ_{k≥m} f(k) 2^(-k)`.
#[derive(Clone)]
pub enum TailModel {
    /// `f(k) = head[k]` for `k < head.len()`, `poly(k)` afterwards.
    Polynomial { head: Vec<BigInt>, poly: Polynomial },
    /// `f(k) = ratio^k`, `0 ≤ ratio < 2`.
    Geometric { ratio: BigRational },
    /// Values only; no closed form.
    Tabulated(Multiplicity),
}

impl fmt::Debug for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailModel::Polynomial { head, poly } => write!(f, "Polynomial {{ head: {head:?}, poly: {poly:?} }}"),
            TailModel::Geometric { ratio } => write!(f, "Geometric {{ ratio: {ratio} }}"),
            TailModel::Tabulated(_) => write!(f, "Tabulated"),
        }
    }
}

impl TailModel {
    /// `f(k) = k + a`.
    pub fn linear(a: i64) -> Self {
        TailModel::Polynomial { head: Vec::new(), poly: Polynomial::linear(a) }
    }

    pub fn constant(c: i64) -> Self {
        TailModel::Polynomial { head: Vec::new(), poly: Polynomial::constant(c) }
    }

    pub fn geometric(ratio: BigRational) -> Result<Self> {
        if ratio.is_negative() || ratio >= BigRational::from_integer(2.into()) {
            return Err(Error::InvalidParameter(format!("geometric ratio {ratio} outside [0, 2)")));
        }
        Ok(TailModel::Geometric { ratio })
    }

    pub fn value(&self, k: u64) -> BigRational {
        match self {
            TailModel::Polynomial { head, poly } => match head.get(k as usize) {
                Some(v) => BigRational::from_integer(v.clone()),
                None => poly.eval_int(k as i64),
            },
            TailModel::Geometric { ratio } => num_traits::pow(ratio.clone(), k as usize),
            TailModel::Tabulated(f) => BigRational::from_integer(f(k).into()),
        }
    }

    /// `Σ_{k≥m} f(k) 2^(-k)`.
    pub fn tail(&self, m: u64) -> Result<BigRational> {
        match self {
            TailModel::Polynomial { head, poly } => {
                let h = head.len() as u64;
                let direct: BigRational = (m..h).map(|k| self.value(k) / pow2_rat(k)).sum();
                Ok(direct + poly.weighted_tail(m.max(h)))
            }
            TailModel::Geometric { ratio } => {
                let half = ratio / BigRational::from_integer(2.into());
                Ok(num_traits::pow(half.clone(), m as usize) / (BigRational::one() - half))
            }
            TailModel::Tabulated(_) => Err(Error::Unsupported("tabulated weights have no closed-form tail".into())),
        }
    }

    /// `Σ_{k≥n} g(k) 2^(-k)` for `g(k) = Σ_{j≤k+c} f(j)`, evaluated from a closed form for `g`.
    pub fn prefix_sum_tail(&self, c: u64, n: u64) -> Result<BigRational> {
        match self {
            TailModel::Polynomial { head, poly } => {
                let h = head.len() as u64;
                let head_total: BigInt = head.iter().sum();
                let q = poly.prefix_sum();
                // for k + c ≥ h: g(k) = H + Q(k + c) - Q(h - 1)
                let offset = BigRational::from_integer(head_total) - q.eval_int(h as i64 - 1);
                let g = q.shift(c as i64).add(&Polynomial::new(vec![offset]));
                let switch = n.max(h.saturating_sub(c));
                let mut direct = BigRational::zero();
                for k in n..switch {
                    let gk: BigInt = head[..=(k + c) as usize].iter().sum();
                    direct += BigRational::from_integer(gk) / pow2_rat(k);
                }
                Ok(direct + g.weighted_tail(switch))
            }
            TailModel::Geometric { ratio } => {
                if ratio.is_one() {
                    return TailModel::constant(1).prefix_sum_tail(c, n);
                }
                // g(k) = (r^(k+c+1) - 1) / (r - 1)
                let one = BigRational::one();
                let half = ratio / BigRational::from_integer(2.into());
                let lead = num_traits::pow(ratio.clone(), c as usize + 1) * num_traits::pow(half.clone(), n as usize)
                    / (&one - &half);
                let geometric = BigRational::from_integer(2.into()) / pow2_rat(n);
                Ok((lead - geometric) / (ratio - one))
            }
            TailModel::Tabulated(_) => Err(Error::Unsupported("tabulated weights have no closed-form tail".into())),
        }
    }
}

/// A sorted name given by a polynomial multiplicity profile:
/// `u(n) = poly(n)` for `n ≥ start` and `0` below.
#[derive(Clone, Debug)]
pub struct ProfileModel {
    start: u64,
    poly: Polynomial,
    cumulative: Polynomial,
}

impl ProfileModel {
    pub fn new(start: u64, poly: Polynomial) -> Self {
        let cumulative = poly.prefix_sum();
        ProfileModel { start, poly, cumulative }
    }

    /// The profile of `linear(a)`: each `n ≥ a` once.
    pub fn linear(a: u64) -> Self {
        ProfileModel::new(a, Polynomial::constant(1))
    }

    /// Each `n ≥ 0` exactly `m` times.
    pub fn uniform(m: i64) -> Self {
        ProfileModel::new(0, Polynomial::constant(m))
    }

    /// The profile of the product of `linear(1)` with itself: `u(n) = n - 1` for `n ≥ 2`.
    pub fn product_of_linear() -> Self {
        ProfileModel::new(2, Polynomial::linear(-1))
    }

    pub fn u(&self, n: u64) -> BigUint {
        if n < self.start {
            return BigUint::zero();
        }
        self.poly.eval_int(n as i64).to_integer().to_biguint().unwrap_or_default()
    }

    pub fn multiplicity(&self) -> Multiplicity {
        let model = self.clone();
        Arc::new(move |n| model.u(n))
    }

    pub fn name(&self) -> Name {
        Name::from_profile(format!("profile u(n) = {:?} for n >= {}", self.poly, self.start), self.multiplicity())
    }

    /// `Σ_{n<v} u(n)`.
    pub fn cumulative(&self, v: u64) -> BigUint {
        if v <= self.start {
            return BigUint::zero();
        }
        let total = self.cumulative.eval_int(v as i64 - 1) - self.cumulative.eval_int(self.start as i64 - 1);
        total.to_integer().to_biguint().unwrap_or_default()
    }

    /// `Σ_{n≥m} u(n) 2^(-n)`.
    pub fn grouped_tail(&self, m: u64) -> Dyadic {
        let from = m.max(self.start);
        let scaled = Dyadic::from_rational(&self.poly.scaled_tail(from)).expect("integer profile has a dyadic tail");
        scaled.mul_pow2(-(from as i64))
    }

    /// `Σ_{k≥p} 2^(-f*(k))` where `f*` enumerates the profile in order.
    pub fn sorted_tail(&self, p: u64) -> Dyadic {
        let target = BigUint::from(p);
        // least v with cumulative(v + 1) > p
        let mut hi = self.start.max(1);
        while self.cumulative(hi + 1) <= target {
            hi = hi.saturating_mul(2);
        }
        let mut lo = 0u64;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.cumulative(mid + 1) > target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let v = lo;
        let remaining = self.cumulative(v + 1) - target;
        Dyadic::from_biguint(remaining).mul_pow2(-(v as i64)) + self.grouped_tail(v + 1)
    }

    /// `max_k (f*(k) - k)` over `k < len`, or 0.
    pub fn excess(&self, len: u64) -> u64 {
        let mut excess = 0u64;
        let mut index = 0u64;
        let mut n = self.start;
        while index < len {
            let count = self.u(n).to_u64().unwrap_or(u64::MAX);
            if count > 0 {
                excess = excess.max(n.saturating_sub(index));
                index = index.saturating_add(count);
            }
            n += 1;
        }
        excess
    }
}
