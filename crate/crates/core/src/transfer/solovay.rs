use std::collections::BTreeMap;

use serde::Serialize;

use super::greedy::greedy_dyadic_increment;
use crate::dyadic::{sum_pow2_neg, Dyadic};
use crate::error::{Error, Result};
use crate::names::Name;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolovayStage {
    pub stage: usize,
    pub g: u64,
    pub target: Dyadic,
    pub emitted: Vec<u64>,
    pub partial_sum: Dyadic,
    /// `partial_sum ∈ (target - 2^(-(stage+1)), target]`.
    pub lands: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileCheck {
    pub n: u64,
    pub count: u64,
    pub bound: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolovayReport {
    pub c: u64,
    pub stages: Vec<SolovayStage>,
    /// `n` whose multiplicity in `f` is final after the executed stages.
    pub complete_window: Vec<u64>,
    /// `u_f(0) ≤ Σ_{k≤c} 2^(c-k) u_g(k)` and `u_f(n) ≤ n + Σ_{k≤n+c} u_g(k)` for `n ≥ 1`.
    pub profile: Vec<ProfileCheck>,
    pub halted: Option<String>,
}

impl SolovayReport {
    pub fn all_land(&self) -> bool {
        self.stages.iter().all(|s| s.lands)
    }

    pub fn profile_holds(&self) -> bool {
        self.profile.iter().all(|p| p.holds)
    }
}

#[derive(Debug)]
pub struct SolovayOutcome {
    pub name: Name,
    pub values: Vec<u64>,
    pub report: SolovayReport,
    /// Why the construction stopped early, if it did.
    pub error: Option<Error>,
}

/// Builds a name for `lim x_t` stage by stage. At stage `t` the greedy step
/// emits exponents until the running sum lands in
/// `(x_{t+1} - 2^(-(t+1)), x_{t+1}]`. Each consumed step is checked against
/// `0 ≤ x_{t+1} - x_t ≤ 2^(c - g(t))`; a violation halts the run.
pub fn solovay_transfer(
    x: &mut dyn Iterator<Item = Dyadic>,
    g: &mut Name,
    c: u64,
    stages: usize,
) -> Result<SolovayOutcome> {
    let mut values = Vec::new();
    let mut records = Vec::new();
    let mut gs = Vec::new();
    let mut sum = Dyadic::zero();
    let mut error = None;
    let mut previous = x.next().ok_or_else(|| Error::InsufficientData("approximation is empty".into()))?;
    for t in 0..stages {
        let Some(next) = x.next() else {
            error = Some(Error::InsufficientData(format!("approximation ends after x_{t}")));
            break;
        };
        let gt = match g.get(t) {
            Ok(v) => v,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let step = &next - &previous;
        let allowed = Dyadic::pow2(c as i64 - gt as i64);
        if step.is_negative() || step > allowed {
            error = Some(Error::HypothesisViolation {
                step: t,
                message: format!("x_{} - x_{t} = {step} not in [0, 2^({c} - {gt})]", t + 1),
            });
            break;
        }
        gs.push(gt);
        let emitted = greedy_dyadic_increment(&sum, &next, t as u64 + 1)?;
        sum += sum_pow2_neg(&emitted);
        let lands = sum <= next && sum > &next - &Dyadic::pow2_neg(t as u64 + 1);
        values.extend_from_slice(&emitted);
        records.push(SolovayStage { stage: t, g: gt, target: next.clone(), emitted, partial_sum: sum.clone(), lands });
        previous = next;
    }
    let done = records.len() as u64;
    let complete_window = complete_window(g, c, done);
    let profile = profile_checks(&values, &gs, c, &complete_window);
    let report = SolovayReport {
        c,
        stages: records,
        complete_window,
        profile,
        halted: error.as_ref().map(|e| e.to_string()),
    };
    let name = Name::truncated("solovay transfer", values.clone(), None);
    Ok(SolovayOutcome { name, values, report, error })
}

/// `n < T` and every stage `t ≥ T` has `g(t) > n + c`.
fn complete_window(g: &Name, c: u64, done: u64) -> Vec<u64> {
    let Some(escape) = g.escape() else {
        return Vec::new();
    };
    (0..done).take_while(|&n| escape.at(n + c) as u64 <= done).collect()
}

fn profile_checks(values: &[u64], gs: &[u64], c: u64, window: &[u64]) -> Vec<ProfileCheck> {
    let mut u_f: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        *u_f.entry(v).or_default() += 1;
    }
    let mut u_g: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in gs {
        *u_g.entry(v).or_default() += 1;
    }
    window
        .iter()
        .map(|&n| {
            let count = u_f.get(&n).copied().unwrap_or(0);
            let bound = if n == 0 {
                u_g.range(..=c).map(|(&k, &u)| u.saturating_mul(1u64.checked_shl((c - k) as u32).unwrap_or(u64::MAX))).fold(0u64, u64::saturating_add)
            } else {
                n.saturating_add(u_g.range(..=n + c).map(|(_, &u)| u).sum())
            };
            ProfileCheck { n, count, bound, holds: count <= bound }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::EscapeBound;

    fn third(n: usize) -> Dyadic {
        // Σ_{k<n} 2^-(2k+2)
        (0..n as u64).map(|k| Dyadic::pow2_neg(2 * k + 2)).sum()
    }

    fn g_even() -> Name {
        let values = (0u64..).map(|n| Ok(2 * n + 2));
        let escape = EscapeBound::new("n/2", |n| (n / 2) as usize);
        Name::from_source("2n+2", values, Some(escape))
    }

    #[test]
    fn one_third() {
        let mut x = (0..).map(third);
        let mut g = g_even();
        let out = solovay_transfer(&mut x, &mut g, 0, 8).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.values, vec![2, 4, 6, 8]);
        assert!(out.report.all_land());
        assert!(out.report.profile_holds());
        assert!(!out.report.complete_window.is_empty());
    }

    #[test]
    fn constant_after_first_step() {
        let mut x = [Dyadic::zero()].into_iter().chain(std::iter::repeat(Dyadic::pow2_neg(2)));
        let mut g = Name::linear(2);
        let out = solovay_transfer(&mut x, &mut g, 0, 6).unwrap();
        assert_eq!(out.values, vec![2]);
        assert!(out.report.stages[2..].iter().all(|s| s.emitted.is_empty()));
    }

    #[test]
    fn violation_halts() {
        let mut x = [Dyadic::zero(), Dyadic::one()].into_iter();
        let mut g = Name::linear(3);
        let out = solovay_transfer(&mut x, &mut g, 0, 4).unwrap();
        assert!(matches!(out.error, Some(Error::HypothesisViolation { step: 0, .. })));
        assert!(out.report.halted.is_some());
    }
}
