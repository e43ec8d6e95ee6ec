use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::opponent::{Jump, Opponent, OpponentSums};
use super::schedule::{Schedule, DEFAULT_SCHEDULE_BUDGET};
use super::{decimal, pair, unpair};
use crate::analysis::{rho_generator, RhoSpec};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::Name;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub rho: String,
    pub stages: u64,
    pub opponents: Vec<String>,
}

/// One stage `t`, handling the pair `(i, j)` with `⟨i, j⟩ = t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: u64,
    pub i: u64,
    pub j: u64,
    /// `⟨i, w(i)[t]⟩`.
    pub requirement: u64,
    /// `s(⟨i, w(i)[t]⟩)`.
    pub s: u64,
    /// `x_t`.
    pub x: Dyadic,
    /// `Σ_{k∈W_i[t]} 2^(-φ_i(k))`.
    pub opponent_sum: Dyadic,
    pub attention: bool,
    pub jump: Option<u64>,
    pub w_before: u64,
    #[serde(with = "decimal")]
    pub c_before: BigUint,
    pub w_after: u64,
    #[serde(with = "decimal")]
    pub c_after: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub stages: Vec<StageRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Header(TraceHeader),
    Stage(StageRecord),
}

impl Trace {
    /// A header line followed by one line per stage.
    pub fn to_json_lines(&self) -> String {
        let mut out = serde_json::to_string(&Line::Header(self.header.clone())).expect("header serializes");
        out.push('\n');
        for r in &self.stages {
            out.push_str(&serde_json::to_string(&Line::Stage(r.clone())).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Trace> {
        let mut header = None;
        let mut stages = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let here = offset;
            offset += line.len();
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(line).map_err(|e| Error::Parse { offset: here, message: e.to_string() })?;
            match parsed {
                Line::Header(h) if header.is_none() && stages.is_empty() => header = Some(h),
                Line::Header(_) => {
                    return Err(Error::Parse { offset: here, message: "unexpected header record".into() });
                }
                Line::Stage(r) => stages.push(r),
            }
        }
        let header = header.ok_or_else(|| Error::Parse { offset: 0, message: "missing header record".into() })?;
        Ok(Trace { header, stages })
    }

    /// Jump exponents in stage order.
    pub fn jumps(&self) -> Vec<u64> {
        self.stages.iter().filter_map(|r| r.jump).collect()
    }
}

#[derive(Debug)]
pub struct DiagonalRun {
    pub name: Name,
    pub values: Vec<u64>,
    pub trace: Trace,
    pub final_x: Dyadic,
}

/// Runs stages `0..stages` with the schedule of `r̂(m) = Σ_{k≤m} r(k)`.
pub fn run_diagonalization(opponents: &[Box<dyn Opponent>], rho: &RhoSpec, stages: u64) -> Result<DiagonalRun> {
    let gen = rho_generator(rho)?;
    let mut schedule = Schedule::for_generator(&gen, DEFAULT_SCHEDULE_BUDGET);
    run_with_schedule(opponents, &format!("{rho:?}"), &mut schedule, stages)
}

/// `(w, c)` per requirement, created on first use with `w = 0`,
/// `c = r̂(s(⟨e, 0⟩)) - 1`.
pub(super) struct Requirements {
    state: BTreeMap<u64, (u64, BigUint)>,
}

impl Requirements {
    pub(super) fn new() -> Self {
        Requirements { state: BTreeMap::new() }
    }

    pub(super) fn get(&mut self, e: u64, schedule: &mut Schedule) -> Result<(u64, BigUint)> {
        if let Some(s) = self.state.get(&e) {
            return Ok(s.clone());
        }
        let c = block_size(e, 0, schedule)? - 1u32;
        self.state.insert(e, (0, c.clone()));
        Ok((0, c))
    }

    /// The counter rule after `e` receives attention.
    pub(super) fn attend(&mut self, e: u64, schedule: &mut Schedule) -> Result<(u64, BigUint)> {
        let (w, c) = self.get(e, schedule)?;
        let next = if c.is_zero() { (w + 1, block_size(e, w + 1, schedule)? - 1u32) } else { (w, c - BigUint::one()) };
        self.state.insert(e, next.clone());
        Ok(next)
    }
}

/// `r̂(s(⟨e, w⟩))`, which is at least `r̂(s(0)) > 0`.
pub(super) fn block_size(e: u64, w: u64, schedule: &mut Schedule) -> Result<BigUint> {
    let s = schedule.at(pair(e, w))?;
    Ok(schedule.r_hat(s))
}

/// `|x - S| ≤ 2^(-s-3)`.
pub(super) fn attention(x: &Dyadic, sum: &Dyadic, s: u64) -> bool {
    (x - sum).abs().le_pow2_neg(s + 3)
}

pub fn run_with_schedule(
    opponents: &[Box<dyn Opponent>],
    rho_label: &str,
    schedule: &mut Schedule,
    stages: u64,
) -> Result<DiagonalRun> {
    if stages == 0 {
        return Err(Error::InvalidParameter("at least one stage is required".into()));
    }
    let mut x = Dyadic::zero();
    let mut published: Vec<Jump> = Vec::new();
    let mut sums = OpponentSums::new(opponents.len());
    let mut reqs = Requirements::new();
    let mut records = Vec::with_capacity(stages as usize);
    for t in 0..stages {
        let (i, j) = unpair(t);
        let (w_before, c_before) = reqs.get(i, schedule)?;
        let requirement = pair(i, w_before);
        let s = schedule.at(requirement)?;
        let opponent_sum = sums.sum(opponents, i, t, &published);
        let attend = attention(&x, &opponent_sum, s);
        let x_t = x.clone();
        let (w_after, c_after) = if attend {
            x += Dyadic::pow2_neg(s);
            published.push(Jump { stage: t, exponent: s });
            reqs.attend(i, schedule)?
        } else {
            (w_before, c_before.clone())
        };
        records.push(StageRecord {
            stage: t,
            i,
            j,
            requirement,
            s,
            x: x_t,
            opponent_sum,
            attention: attend,
            jump: attend.then_some(s),
            w_before,
            c_before,
            w_after,
            c_after,
        });
    }
    let values: Vec<u64> = published.iter().map(|j| j.exponent).collect();
    let header = TraceHeader {
        rho: rho_label.to_string(),
        stages,
        opponents: opponents.iter().map(|o| o.label()).collect(),
    };
    Ok(DiagonalRun {
        name: Name::from_list(format!("diagonal against {} opponents", opponents.len()), values.clone()),
        values,
        trace: Trace { header, stages: records },
        final_x: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::builtin_suite;
    use crate::names::partial_sum;

    #[test]
    fn first_stage_attends() {
        let run = run_diagonalization(&[], &RhoSpec::One, 1).unwrap();
        let r = &run.trace.stages[0];
        assert_eq!((r.i, r.j, r.s), (0, 0, 1));
        assert!(r.attention);
        assert_eq!(run.final_x, Dyadic::pow2_neg(1));
        assert_eq!(r.c_before, BigUint::zero());
        assert_eq!((r.w_after, r.c_after.clone()), (1, BigUint::from(189u32)));
    }

    #[test]
    fn divergent_opponents_attend_once() {
        let run = run_diagonalization(&[], &RhoSpec::One, 300).unwrap();
        assert_eq!(run.values, vec![1]);
        assert!(run.trace.stages[1..].iter().all(|r| !r.attention));
    }

    #[test]
    fn partial_sums_match_trace() {
        let mut run = run_diagonalization(&builtin_suite(), &RhoSpec::One, 400).unwrap();
        let mut n = 0;
        for r in &run.trace.stages {
            assert_eq!(partial_sum(&mut run.name, n).unwrap(), r.x);
            n += r.attention as usize;
        }
        assert!(n > 5);
    }

    #[test]
    fn json_lines_round_trip() {
        let run = run_diagonalization(&builtin_suite(), &RhoSpec::One, 50).unwrap();
        let text = run.trace.to_json_lines();
        assert!(text.starts_with("{\"kind\":\"header\""));
        let back = Trace::from_json_lines(&text).unwrap();
        assert_eq!(back, run.trace);
        assert_eq!(back.to_json_lines(), text);
        assert!(matches!(Trace::from_json_lines("{\"kind\":\"stage\"}\n"), Err(Error::Parse { .. })));
    }
}
