//! Root test with an explicit remainder and the dyadic modulus it yields.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::{ModulusCertificate, SeriesTarget};

/// Largest `j` tried for the grid values `1 - 2^(-j)`.
pub const GRID_DEPTH: u32 = 64;

/// `q` with `Σ_{k≥n} |a_k| ≤ q^n / (1 - q)` for every `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootBound {
    #[serde(serialize_with = "ser_rational")]
    pub q: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub p: BigRational,
    pub m: usize,
    pub provenance: String,
    pub conditions: Vec<String>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl RootBound {
    /// `q^n / (1 - q)`.
    pub fn tail_bound(&self, n: u64) -> BigRational {
        num_traits::pow(self.q.clone(), n as usize) / (BigRational::one() - &self.q)
    }

    /// Replaces the open extrapolation condition by a proof note.
    pub fn with_proof(mut self, note: &str) -> Self {
        self.conditions.clear();
        self.provenance = format!("{}; {note}", self.provenance);
        self
    }
}

fn grid_candidates(p: &BigRational) -> Vec<BigRational> {
    let mut out = vec![p.clone()];
    for j in 1..=GRID_DEPTH {
        let g = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << j);
        if &g > p {
            out.push(g);
        }
    }
    out
}

/// Finds the least grid value `q ≥ p` whose geometric bound dominates the head tails.
///
/// Every available term from index `m` on must satisfy `|a_n| ≤ p^n`; the tails
/// starting before `m` are bounded by their finite head plus `p^m / (1 - p)`.
pub fn root_test_bound(terms: &[Dyadic], p: &BigRational, m: usize) -> Result<RootBound> {
    if p.is_negative() || p >= &BigRational::one() {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1)")));
    }
    let mut power = num_traits::pow(p.clone(), m);
    for (n, a) in terms.iter().enumerate().skip(m) {
        if a.abs().to_rational() > power {
            return Err(Error::HypothesisViolation { step: n, message: format!("|a_{n}| = {a} exceeds p^{n}") });
        }
        power *= p;
    }
    let one = BigRational::one();
    let geometric_rest = num_traits::pow(p.clone(), m) / (&one - p);
    let mut head_tails = Vec::with_capacity(m);
    let mut acc = geometric_rest;
    for n in (0..m).rev() {
        let a = terms.get(n).ok_or_else(|| {
            Error::InsufficientData(format!("head term a_{n} missing ({} available)", terms.len()))
        })?;
        acc += a.abs().to_rational();
        head_tails.push((n, acc.clone()));
    }
    let q = grid_candidates(p)
        .into_iter()
        .find(|q| {
            head_tails
                .iter()
                .all(|(n, t)| num_traits::pow(q.clone(), *n) / (&one - q) >= *t)
        })
        .ok_or_else(|| Error::SearchExhausted(format!("no grid q < 1 dominates the first {m} tails")))?;
    Ok(RootBound {
        q,
        p: p.clone(),
        m,
        provenance: format!("root test, |a_n| <= p^n from n = {m}"),
        conditions: vec![format!("|a_n| <= p^n beyond the {} inspected terms", terms.len())],
    })
}

/// `s(n) = min{m : q^m / (1 - q) ≤ 2^(-n)}` by exact integer comparison.
pub fn modulus_from_root_bound(b: &RootBound) -> ModulusCertificate {
    let num = b.q.numer().to_biguint().unwrap_or_default();
    let den = b.q.denom().to_biguint().unwrap_or_else(BigUint::one);
    let gap = &den - &num;
    let q = b.q.clone();
    let cert = ModulusCertificate::new(
        SeriesTarget::Weighted,
        format!("min m with {q}^m/(1-{q}) <= 2^-n ({})", b.provenance),
        move |n| {
            // q^m / (1 - q) ≤ 2^(-n)  ⟺  num^m · 2^n · den ≤ gap · den^m
            let holds = |m: u64| -> bool {
                let e = m as u32;
                (num.pow(e) << n) * &den <= &gap * den.pow(e)
            };
            if num.is_zero() {
                return if n == 0 && gap >= den { 0 } else { 1 };
            }
            let mut hi = 1u64;
            while !holds(hi) {
                hi *= 2;
            }
            let mut lo = 0u64;
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if holds(mid) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        },
    );
    b.conditions.iter().fold(cert, |c, cond| c.with_condition(cond.clone()))
}
