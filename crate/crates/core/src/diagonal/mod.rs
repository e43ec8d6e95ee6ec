//! Finite-stage simulation of the diagonal construction of a real whose names
//! all grow like a prescribed `r̂`, played against step-budgeted opponents,
//! together with an independent trace checker.

mod check;
mod opponent;
mod run;
mod schedule;

pub use check::{check_trace, check_trace_with_header, CheckReport, Violation};
pub use opponent::{builtin_suite, parse_opponent, Divergent, Echo, Jump, Opponent, OpponentSums, Table};
pub use run::{run_diagonalization, run_with_schedule, DiagonalRun, StageRecord, Trace, TraceHeader};
pub use schedule::{s_schedule, Schedule, DEFAULT_SCHEDULE_BUDGET, MAX_R_HAT_BITS};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Roots;

use crate::analysis::RhoSpec;
use crate::error::{Error, Result};

/// Cantor pairing `⟨i, j⟩ = (i+j)(i+j+1)/2 + j`.
pub fn pair(i: u64, j: u64) -> u64 {
    let d = i as u128 + j as u128;
    u64::try_from(d * (d + 1) / 2 + j as u128).expect("pairing overflows u64")
}

/// Inverse of [`pair`].
pub fn unpair(t: u64) -> (u64, u64) {
    let t = t as u128;
    let mut d = ((8 * t + 1).sqrt() - 1) / 2;
    // guard against rounding at the diagonal boundaries
    while d * (d + 1) / 2 > t {
        d -= 1;
    }
    while (d + 1) * (d + 2) / 2 <= t {
        d += 1;
    }
    let j = t - d * (d + 1) / 2;
    ((d - j) as u64, j as u64)
}

/// Reads back the label written into trace headers: `one`, `two` or `seq(p/q)`.
pub fn rho_from_label(label: &str) -> Result<RhoSpec> {
    match label.trim() {
        "one" => Ok(RhoSpec::One),
        "two" => Ok(RhoSpec::Two),
        other => {
            let inner = other
                .strip_prefix("seq(")
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::InvalidParameter(format!("unknown rho label {other:?}")))?;
            let (p, q) = inner.split_once('/').unwrap_or((inner, "1"));
            let bad = || Error::InvalidParameter(format!("bad rational in rho label {other:?}"));
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q == BigInt::from(0) {
                return Err(bad());
            }
            Ok(RhoSpec::constant(BigRational::new(p, q)))
        }
    }
}

pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        for i in 0..=50 {
            for j in 0..=50 {
                assert_eq!(unpair(pair(i, j)), (i, j));
            }
        }
        for t in 0..2000 {
            let (i, j) = unpair(t);
            assert_eq!(pair(i, j), t);
        }
    }

    #[test]
    fn rho_labels_round_trip() {
        for spec in [RhoSpec::One, RhoSpec::Two, RhoSpec::constant(BigRational::new(3.into(), 2.into()))] {
            let label = format!("{spec:?}");
            assert_eq!(format!("{:?}", rho_from_label(&label).unwrap()), label);
        }
        assert!(rho_from_label("three").is_err());
    }
}
