use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use super::opponent::{Jump, Opponent, OpponentSums};
use super::run::{attention, block_size, Requirements, Trace};
use super::schedule::{Schedule, DEFAULT_SCHEDULE_BUDGET};
use super::{pair, rho_from_label, unpair};
use crate::analysis::rho_generator;
use crate::dyadic::Dyadic;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub stage: u64,
    pub rule: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub stages: u64,
    pub violations: Vec<Violation>,
    /// `(requirement i, attention count)`.
    pub attention: Vec<(u64, u64)>,
    /// Consecutive attention pairs checked against the lower bound.
    pub lower_pairs: u64,
    /// Pairs whose side condition held, checked against the upper bound.
    pub upper_pairs: u64,
    pub upper_skipped: u64,
    /// Blocks `(i, j)` finished within the run; each has `u_f(s(⟨i,j⟩)) = r̂(s(⟨i,j⟩))`.
    pub completed_blocks: u64,
    pub final_x: Dyadic,
    /// Certified upper bound on `Σ_k r̂(k) 2^(-k)`.
    pub limit_bound: Dyadic,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Visit {
    stage: u64,
    sum: Dyadic,
    requirement: u64,
    s: u64,
}

/// Reads `rho` from the trace header and checks against a fresh schedule.
pub fn check_trace_with_header(trace: &Trace, opponents: &[Box<dyn Opponent>]) -> Result<CheckReport> {
    let gen = rho_generator(&rho_from_label(&trace.header.rho)?)?;
    let mut schedule = Schedule::for_generator(&gen, DEFAULT_SCHEDULE_BUDGET);
    Ok(check_trace(trace, opponents, &mut schedule))
}

/// Replays the construction from scratch and compares every record with the
/// replay. Also checks, on the replay, that consecutive attentions of a
/// requirement move its opponent sum by at least `3/4 · 2^(-s)` and, when every
/// attention in between belongs to a later requirement, by at most `7/4 · 2^(-s)`,
/// and, on the trace's own jumps, the multiplicity and limit bounds.
pub fn check_trace(trace: &Trace, opponents: &[Box<dyn Opponent>], schedule: &mut Schedule) -> CheckReport {
    let mut violations = Vec::new();
    let mut flag = |stage: u64, rule: &'static str, message: String| violations.push(Violation { stage, rule, message });
    let labels: Vec<String> = opponents.iter().map(|o| o.label()).collect();
    if labels != trace.header.opponents {
        flag(0, "header", format!("trace lists opponents {:?}, checker has {labels:?}", trace.header.opponents));
    }
    if trace.header.stages != trace.stages.len() as u64 {
        flag(0, "header", format!("header announces {} stages, trace has {}", trace.header.stages, trace.stages.len()));
    }
    let mut x = Dyadic::zero();
    let mut published: Vec<Jump> = Vec::new();
    let mut sums = OpponentSums::new(opponents.len());
    let mut reqs = Requirements::new();
    let mut visits: BTreeMap<u64, Vec<Visit>> = BTreeMap::new();
    let mut all_attentions: Vec<(u64, u64)> = Vec::new();
    let mut completed: Vec<(u64, u64)> = Vec::new();
    let mut aborted = false;
    for (pos, rec) in trace.stages.iter().enumerate() {
        let t = pos as u64;
        if rec.stage != t {
            flag(t, "stage", format!("record {pos} is labelled stage {}", rec.stage));
        }
        let (i, j) = unpair(t);
        if (rec.i, rec.j) != (i, j) {
            flag(t, "pairing", format!("({}, {}) recorded, ({i}, {j}) expected", rec.i, rec.j));
        }
        let step = (|| -> Result<_> {
            let (w, c) = reqs.get(i, schedule)?;
            let requirement = pair(i, w);
            Ok((w, c, requirement, schedule.at(requirement)?))
        })();
        let Ok((w, c, requirement, s)) = step else {
            flag(t, "schedule", format!("schedule unavailable: {}", step.unwrap_err()));
            aborted = true;
            break;
        };
        if (rec.w_before, &rec.c_before, rec.requirement, rec.s) != (w, &c, requirement, s) {
            flag(
                t,
                "state",
                format!(
                    "recorded w={}, c={}, requirement={}, s={}; expected w={w}, c={c}, requirement={requirement}, s={s}",
                    rec.w_before, rec.c_before, rec.requirement, rec.s
                ),
            );
        }
        if rec.x != x {
            flag(t, "value", format!("x recorded as {}, replay gives {x}", rec.x));
        }
        let sum = sums.sum(opponents, i, t, &published);
        if rec.opponent_sum != sum {
            flag(t, "opponent-sum", format!("recorded {}, replay gives {sum}", rec.opponent_sum));
        }
        let attend = attention(&x, &sum, s);
        if rec.attention != attend {
            flag(t, "attention", format!("attention recorded as {}, condition gives {attend}", rec.attention));
        }
        let expected_jump = attend.then_some(s);
        if rec.jump != expected_jump {
            flag(t, "jump", format!("jump {:?} recorded, attention rule gives {expected_jump:?}", rec.jump));
        }
        let after = if attend {
            visits.entry(i).or_default().push(Visit { stage: t, sum: sum.clone(), requirement, s });
            all_attentions.push((t, requirement));
            x += Dyadic::pow2_neg(s);
            published.push(Jump { stage: t, exponent: s });
            match reqs.attend(i, schedule) {
                Ok(next) => {
                    if next.0 > w {
                        completed.push((i, w));
                    }
                    next
                }
                Err(e) => {
                    flag(t, "schedule", format!("schedule unavailable: {e}"));
                    aborted = true;
                    break;
                }
            }
        } else {
            (w, c)
        };
        if (rec.w_after, &rec.c_after) != (after.0, &after.1) {
            flag(
                t,
                "counter",
                format!("recorded w={}, c={} after the stage; rule gives w={}, c={}", rec.w_after, rec.c_after, after.0, after.1),
            );
        }
    }

    let mut lower_pairs = 0;
    let mut upper_pairs = 0;
    let mut upper_skipped = 0;
    if !aborted {
        for list in visits.values() {
            for pair in list.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let moved = &b.sum - &a.sum;
                let unit = Dyadic::pow2_neg(a.s + 2);
                lower_pairs += 1;
                if moved < &unit * &Dyadic::from_integer(3) {
                    flag(b.stage, "lower-bound", format!("opponent sum moved {moved} since stage {}", a.stage));
                }
                let from = all_attentions.partition_point(|&(t, _)| t <= a.stage);
                let to = all_attentions.partition_point(|&(t, _)| t < b.stage);
                if all_attentions[from..to].iter().all(|&(_, k)| k > a.requirement) {
                    upper_pairs += 1;
                    if moved > &unit * &Dyadic::from_integer(7) {
                        flag(b.stage, "upper-bound", format!("opponent sum moved {moved} since stage {}", a.stage));
                    }
                } else {
                    upper_skipped += 1;
                }
            }
        }
    }

    // counts on the trace's own jumps
    let mut u_f: BTreeMap<u64, u64> = BTreeMap::new();
    let mut jump_stage: BTreeMap<u64, u64> = BTreeMap::new();
    for r in &trace.stages {
        if let Some(e) = r.jump {
            *u_f.entry(e).or_default() += 1;
            jump_stage.insert(e, r.stage);
        }
    }
    for (&e, &count) in &u_f {
        let cap = schedule.r_hat(e);
        if BigUint::from(count) > cap {
            flag(jump_stage[&e], "multiplicity", format!("u_f({e}) = {count} exceeds r_hat({e}) = {cap}"));
        }
    }
    let mut completed_blocks = 0;
    for (i, j) in completed {
        if let Ok(size) = block_size(i, j, schedule) {
            completed_blocks += 1;
            let m = schedule.at(pair(i, j)).expect("memoized");
            let count = u_f.get(&m).copied().unwrap_or(0);
            if BigUint::from(count) != size {
                flag(trace.stages.len() as u64, "block", format!("block ({i}, {j}) at exponent {m} has {count} jumps, r_hat gives {size}"));
            }
        }
    }
    let final_x: Dyadic = trace.stages.iter().filter_map(|r| r.jump).map(Dyadic::pow2_neg).sum();
    let limit_bound = schedule.tail_upper(0);
    if final_x > limit_bound {
        flag(trace.stages.len() as u64, "limit", format!("jumps sum to {final_x}, above {limit_bound}"));
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, list) in &visits {
        counts.insert(*i, list.len() as u64);
    }
    CheckReport {
        stages: trace.stages.len() as u64,
        violations,
        attention: counts.into_iter().collect(),
        lower_pairs,
        upper_pairs,
        upper_skipped,
        completed_blocks,
        final_x,
        limit_bound,
    }
}
