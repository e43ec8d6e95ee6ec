use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::{ModulusCertificate, Name, SeriesTarget};

/// `x_A = Σ_{a∈A} 2^(-(a+1))`.
pub fn set_value(a: &BTreeSet<u64>) -> Dyadic {
    let exps: Vec<u64> = a.iter().map(|&v| v + 1).collect();
    crate::dyadic::sum_pow2_neg(&exps)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompileStage {
    pub stage: usize,
    /// `s(t+1)`, the approximation index the stage reads from.
    pub schedule: usize,
    /// `B_{t+1} = A_{s(t+1)} ∩ [0, h(t)]`.
    pub block: Vec<u64>,
    pub value: Dyadic,
    /// `(h(k) + 1, ν_{k,t})` for nonzero multiplicities.
    pub emitted: Vec<(u64, u64)>,
    /// `x_{B_t} + Σ ν_{k,t} 2^(-(h(k)+1)) = x_{B_{t+1}}`.
    pub balanced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicityCheck {
    pub value: u64,
    pub count: u64,
    pub bound: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompileReport {
    pub stages: Vec<CompileStage>,
    /// Realized counts of `h(n) + 1` against `Σ_{k=h(n-1)}^{h(n)} 2^(h(n)-k)`.
    pub multiplicity: Vec<MultiplicityCheck>,
}

impl CompileReport {
    pub fn balanced(&self) -> bool {
        self.stages.iter().all(|s| s.balanced)
    }

    pub fn bounds_hold(&self) -> bool {
        self.multiplicity.iter().all(|m| m.holds)
    }
}

#[derive(Debug)]
pub struct CompileOutcome {
    pub name: Name,
    pub values: Vec<u64>,
    pub report: CompileReport,
}

/// Compiles an increasing approximation `A_0, A_1, …` of a set containing the
/// range of `h` into a name for `x_A` whose values all lie in `{h(k) + 1}`.
///
/// The schedule is `s(0) = 0`, `s(n+1) = min{m > s(n) : h(0..=n) ⊆ A_m}`, looked up
/// within the first `budget` approximations. Stage `t` moves from `x_{B_t}` to
/// `x_{B_{t+1}}` by greedy jumps of size `2^(-(h(k)+1))`, largest first.
pub fn set_to_reordered_name(
    sets: &mut dyn Iterator<Item = BTreeSet<u64>>,
    h: &dyn Fn(u64) -> u64,
    stages: usize,
    budget: usize,
) -> Result<CompileOutcome> {
    let hs: Vec<u64> = (0..stages as u64 + 1).map(h).collect();
    for (n, w) in hs.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter(format!("h is not increasing at {n}: {} then {}", w[0], w[1])));
        }
    }
    for (n, &v) in hs.iter().enumerate() {
        if v < n as u64 + 2 {
            return Err(Error::InvalidParameter(format!("h({n}) = {v} < {n} + 2")));
        }
    }
    let mut seen: Vec<BTreeSet<u64>> = Vec::new();
    let mut fetch = |m: usize| -> Option<BTreeSet<u64>> {
        while seen.len() <= m {
            if seen.len() >= budget {
                return None;
            }
            seen.push(sets.next()?);
        }
        Some(seen[m].clone())
    };
    let mut schedule = 0usize;
    let mut prev_value = Dyadic::zero();
    let mut values = Vec::new();
    let mut records = Vec::new();
    for t in 0..stages {
        let wanted = &hs[..=t];
        let mut m = schedule + 1;
        let a = loop {
            let Some(a) = fetch(m) else {
                return Err(Error::ScheduleStall(format!(
                    "no A_m with m <= {} contains h(0..={t})",
                    budget.saturating_sub(1)
                )));
            };
            if wanted.iter().all(|v| a.contains(v)) {
                break a;
            }
            m += 1;
        };
        schedule = m;
        let block: BTreeSet<u64> = a.range(..=hs[t]).copied().collect();
        let value = set_value(&block);
        let mut rest = &value - &prev_value;
        if rest.is_negative() {
            return Err(Error::HypothesisViolation {
                step: t,
                message: format!("x_B decreases from {prev_value} to {value}"),
            });
        }
        let mut emitted = Vec::new();
        for &hk in wanted {
            let unit = Dyadic::pow2_neg(hk + 1);
            let count = rest.floor_at(hk + 1);
            let count: u64 = count
                .try_into()
                .map_err(|_| Error::BudgetExceeded(format!("too many jumps of 2^-{}", hk + 1)))?;
            if count > 0 {
                rest -= &(&unit * &Dyadic::from_integer(count));
                emitted.push((hk + 1, count));
                values.extend(std::iter::repeat_n(hk + 1, count as usize));
            }
        }
        if !rest.is_zero() {
            return Err(Error::Denomination(format!(
                "stage {t}: remainder {rest} is not a multiple of 2^-{}",
                hs[t] + 1
            )));
        }
        let jumps: Dyadic = emitted
            .iter()
            .map(|&(e, k)| Dyadic::pow2_neg(e) * Dyadic::from_integer(k))
            .sum();
        let balanced = &prev_value + &jumps == value;
        records.push(CompileStage {
            stage: t,
            schedule,
            block: block.iter().copied().collect(),
            value: value.clone(),
            emitted,
            balanced,
        });
        prev_value = value;
    }
    let report = CompileReport { multiplicity: multiplicity_checks(&values, &hs[..stages]), stages: records };
    let name = Name::truncated("compiled from set approximation", values.clone(), None);
    Ok(CompileOutcome { name, values, report })
}

fn multiplicity_checks(values: &[u64], hs: &[u64]) -> Vec<MultiplicityCheck> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    hs.iter()
        .enumerate()
        .map(|(n, &hn)| {
            let lo = if n == 0 { 0 } else { hs[n - 1] };
            let bound = (lo..=hn)
                .map(|k| 1u64.checked_shl((hn - k) as u32).unwrap_or(u64::MAX))
                .fold(0u64, u64::saturating_add);
            let count = counts.get(&(hn + 1)).copied().unwrap_or(0);
            MultiplicityCheck { value: hn + 1, count, bound, holds: count <= bound }
        })
        .collect()
}

/// `g(n) = h(n+1)` for the grouped series of the compiled name.
pub fn compile_set_modulus(h: impl Fn(u64) -> u64 + Send + Sync + 'static) -> ModulusCertificate {
    ModulusCertificate::new(SeriesTarget::Grouped, "h(n+1)", move |n| h(n + 1))
        .with_condition("h(n) >= n + 2 and h increasing")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens(m: usize) -> BTreeSet<u64> {
        (0..m as u64).map(|k| 2 * k).collect()
    }

    #[test]
    fn hand_trace() {
        let mut sets = (0..).map(evens);
        let out = set_to_reordered_name(&mut sets, &|n| 2 * n + 2, 3, 100).unwrap();
        let schedules: Vec<usize> = out.report.stages.iter().map(|s| s.schedule).collect();
        assert_eq!(schedules, vec![2, 3, 4]);
        assert_eq!(out.report.stages[0].block, vec![0, 2]);
        assert_eq!(out.report.stages[1].block, vec![0, 2, 4]);
        assert_eq!(out.report.stages[2].block, vec![0, 2, 4, 6]);
        assert_eq!(out.values, vec![3, 3, 3, 3, 3, 5, 7]);
        assert!(out.report.balanced());
        assert!(out.report.bounds_hold());
    }

    #[test]
    fn stalled_set_is_reported() {
        let mut sets = std::iter::repeat(BTreeSet::from([0u64, 2]));
        let err = set_to_reordered_name(&mut sets, &|n| 2 * n + 2, 3, 50).unwrap_err();
        assert!(matches!(err, Error::ScheduleStall(_)));
    }

    #[test]
    fn h_is_validated() {
        let mut sets = (0..).map(evens);
        assert!(set_to_reordered_name(&mut sets, &|n| n + 1, 3, 10).is_err());
    }

    #[test]
    fn modulus_on_trace() {
        let mut sets = (0..).map(evens);
        let out = set_to_reordered_name(&mut sets, &|n| 2 * n + 2, 12, 100).unwrap();
        let g = compile_set_modulus(|n| 2 * n + 2);
        let profile = crate::names::UProfile::of_values(&out.values, 64);
        let tail = |m: u64| -> Dyadic {
            (m..=64).map(|v| Dyadic::from_integer(profile.count(v)).mul_pow2(-(v as i64))).sum()
        };
        g.validate(&tail, 10).unwrap();
    }
}
