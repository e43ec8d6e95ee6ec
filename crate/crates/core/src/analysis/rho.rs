//! Multiplicity functions `r` with prescribed root growth, each with a modulus for
//! `Σ r(k) 2^(-k)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rootbound::{modulus_from_root_bound, root_test_bound};
use super::Multiplicity;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::{ModulusCertificate, SeriesTarget};

/// Terms inspected when a root test has to be fitted to data.
pub const SEQ_WINDOW: usize = 64;

pub type RationalSeq = Arc<dyn Fn(u64) -> BigRational + Send + Sync>;

#[derive(Clone)]
pub enum RhoSpec {
    /// `r(n) = n`.
    One,
    /// `r(0) = 0`, `r(n) = ⌈2^n / n²⌉`.
    Two,
    /// `r(n) = ⌈ρ_n^n⌉`.
    Seq { label: String, rho: RationalSeq },
}

impl fmt::Debug for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::One => write!(f, "one"),
            RhoSpec::Two => write!(f, "two"),
            RhoSpec::Seq { label, .. } => write!(f, "seq({label})"),
        }
    }
}

impl RhoSpec {
    pub fn constant(rho: BigRational) -> Self {
        RhoSpec::Seq { label: rho.to_string(), rho: Arc::new(move |_| rho.clone()) }
    }
}

type TailUpper = Arc<dyn Fn(u64) -> Dyadic + Send + Sync>;

#[derive(Clone)]
pub struct RhoGenerator {
    spec: RhoSpec,
    r: Multiplicity,
    modulus: ModulusCertificate,
    tail_upper: TailUpper,
}

impl fmt::Debug for RhoGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RhoGenerator").field("spec", &self.spec).field("modulus", &self.modulus).finish()
    }
}

impl RhoGenerator {
    pub fn spec(&self) -> &RhoSpec {
        &self.spec
    }

    pub fn r(&self, n: u64) -> BigUint {
        (self.r)(n)
    }

    pub fn multiplicity(&self) -> Multiplicity {
        self.r.clone()
    }

    pub fn modulus(&self) -> &ModulusCertificate {
        &self.modulus
    }

    /// A certified upper bound on `Σ_{k≥m} r(k) 2^(-k)`.
    pub fn tail_upper(&self, m: u64) -> Dyadic {
        (self.tail_upper)(m)
    }
}

fn ceil_pow(rho: &BigRational, n: u64) -> BigUint {
    let p = num_traits::pow(rho.clone(), n as usize);
    p.ceil().to_integer().to_biguint().unwrap_or_default()
}

fn two_r(n: u64) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    let num = BigUint::one() << n;
    let den = BigUint::from(n) * BigUint::from(n);
    (&num + &den - 1u32) / den
}

fn head_sum(r: &Multiplicity, from: u64, to: u64) -> Dyadic {
    (from..to).map(|k| Dyadic::from_biguint(r(k)).mul_pow2(-(k as i64))).sum()
}

pub fn rho_generator(spec: &RhoSpec) -> Result<RhoGenerator> {
    match spec {
        RhoSpec::One => {
            let r: Multiplicity = Arc::new(BigUint::from);
            let terms: Vec<Dyadic> = (0..SEQ_WINDOW as u64).map(|n| Dyadic::from_integer(n).mul_pow2(-(n as i64))).collect();
            let bound = root_test_bound(&terms, &BigRational::new(3.into(), 4.into()), 0)?
                .with_proof("n <= (3/2)^n for every n");
            let modulus = modulus_from_root_bound(&bound);
            // Σ_{k≥m} k 2^(-k) = (m + 1) 2^(1-m)
            let tail_upper: TailUpper = Arc::new(|m| Dyadic::from_integer(m + 1).mul_pow2(1 - m as i64));
            Ok(RhoGenerator { spec: spec.clone(), r, modulus, tail_upper })
        }
        RhoSpec::Two => {
            // Σ_{k≥M} ⌈2^k/k²⌉ 2^(-k) ≤ Σ_{k≥M} 1/k² + 2^(1-M) ≤ 1/(M-1) + 2^(1-M) for M ≥ 2
            let r: Multiplicity = Arc::new(two_r);
            let tail_r = r.clone();
            let tail_upper: TailUpper = Arc::new(move |m| {
                let big_m = m.max(2);
                let floor_log = 63 - (big_m - 1).leading_zeros() as u64;
                let geometric = if big_m > 1 << 16 {
                    // 2^(1-M) ≤ 2^(-⌊log2(M-1)⌋); avoids aligning against a huge exponent
                    Dyadic::pow2_neg(floor_log)
                } else {
                    Dyadic::pow2_neg(big_m - 1)
                };
                head_sum(&tail_r, m, big_m) + Dyadic::pow2_neg(floor_log) + geometric
            });
            let modulus = ModulusCertificate::new(
                SeriesTarget::Weighted,
                "2^(n+1) + 1 from tail <= 1/(M-1) + 2^(1-M)",
                |n| if n >= 62 { u64::MAX } else { (1u64 << (n + 1)) + 1 },
            );
            Ok(RhoGenerator { spec: spec.clone(), r, modulus, tail_upper })
        }
        RhoSpec::Seq { label, rho } => {
            for n in 0..SEQ_WINDOW as u64 {
                let v = rho(n);
                if v.is_negative() {
                    return Err(Error::InvalidParameter(format!("rho_{n} = {v} is negative")));
                }
            }
            let seq = rho.clone();
            let r: Multiplicity = Arc::new(move |n| ceil_pow(&seq(n), n));
            let terms: Vec<Dyadic> =
                (0..SEQ_WINDOW as u64).map(|n| Dyadic::from_biguint(r(n)).mul_pow2(-(n as i64))).collect();
            let (p, m) = fit_root_test(&terms).ok_or_else(|| {
                Error::SearchExhausted(format!("no p < 1 dominates r(n) 2^-n on the window for seq({label})"))
            })?;
            let bound = root_test_bound(&terms, &p, m)?;
            let modulus = modulus_from_root_bound(&bound)
                .with_condition(format!("rho_n >= 0 beyond the {SEQ_WINDOW} inspected terms"));
            let tail_upper: TailUpper = Arc::new(move |m| Dyadic::ceil_tight(&bound.tail_bound(m)));
            Ok(RhoGenerator { spec: spec.clone(), r, modulus, tail_upper })
        }
    }
}

/// Smallest grid `p = 1 - 2^(-j)` with some `m ≤ window/2` such that
/// `a_n ≤ p^n` for all inspected `n ≥ m`.
fn fit_root_test(terms: &[Dyadic]) -> Option<(BigRational, usize)> {
    for j in 1..=32u32 {
        let p = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << j);
        let mut power = BigRational::one();
        let mut last_bad = None;
        for (n, a) in terms.iter().enumerate() {
            if a.to_rational() > power {
                last_bad = Some(n);
            }
            power *= &p;
        }
        let m = last_bad.map_or(0, |n| n + 1);
        if m <= terms.len() / 2 {
            return Some((p, m));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_instances() {
        assert_eq!(rho_generator(&RhoSpec::One).unwrap().r(5), BigUint::from(5u32));
        assert_eq!(rho_generator(&RhoSpec::Two).unwrap().r(3), BigUint::one());
        let seq = rho_generator(&RhoSpec::constant(BigRational::new(3.into(), 2.into()))).unwrap();
        assert_eq!(seq.r(4), BigUint::from(6u32));
        assert!(seq.modulus().is_conditional());
    }

    #[test]
    fn negative_seq_rejected() {
        let spec = RhoSpec::constant(BigRational::from_integer((-1).into()));
        assert!(matches!(rho_generator(&spec), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn moduli_validate_against_tail_bounds() {
        for spec in [RhoSpec::One, RhoSpec::Two, RhoSpec::constant(BigRational::new(3.into(), 2.into()))] {
            let g = rho_generator(&spec).unwrap();
            g.modulus().validate(&|m| g.tail_upper(m), 16).unwrap();
        }
    }

    #[test]
    fn linear_tail_is_exact() {
        let g = rho_generator(&RhoSpec::One).unwrap();
        for m in 0..20 {
            let exact = super::super::Polynomial::linear(0).weighted_tail(m);
            assert_eq!(g.tail_upper(m).to_rational(), exact);
        }
    }

    #[test]
    fn tail_upper_dominates_truncated_sums() {
        for spec in [RhoSpec::One, RhoSpec::Two, RhoSpec::constant(BigRational::new(7.into(), 4.into()))] {
            let g = rho_generator(&spec).unwrap();
            for m in 0..12 {
                let partial = head_sum(&g.multiplicity(), m, 200);
                assert!(partial <= g.tail_upper(m), "{spec:?} at {m}");
            }
        }
    }
}
