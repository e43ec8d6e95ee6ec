use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A jump published by the construction: `x_{stage+1} = x_stage + 2^(-exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Jump {
    pub stage: u64,
    pub exponent: u64,
}

/// A step-budgeted partial evaluator `k ↦ φ(k)[budget]`.
///
/// Convergence must be monotone: once `query(k, t, …)` is `Some(v)`, every larger
/// budget returns the same `v` (given a published list that only grows).
pub trait Opponent: Send + Sync {
    /// Text form accepted by [`parse_opponent`].
    fn label(&self) -> String;

    /// `published` is the construction's jump list before the current stage.
    fn query(&self, k: u64, budget: u64, published: &[Jump]) -> Option<u64>;

    fn diverges_everywhere(&self) -> bool {
        false
    }
}

pub struct Divergent;

impl Opponent for Divergent {
    fn label(&self) -> String {
        "divergent".into()
    }

    fn query(&self, _: u64, _: u64, _: &[Jump]) -> Option<u64> {
        None
    }

    fn diverges_everywhere(&self) -> bool {
        true
    }
}

/// Replays the construction's own jumps: `φ(k)` is the `k`-th published exponent,
/// visible `delay` stages after the stage that emitted it.
pub struct Echo {
    pub delay: u64,
}

impl Opponent for Echo {
    fn label(&self) -> String {
        format!("echo({})", self.delay)
    }

    fn query(&self, k: u64, budget: u64, published: &[Jump]) -> Option<u64> {
        let jump = published.get(k as usize)?;
        (jump.stage + 1 + self.delay <= budget).then_some(jump.exponent)
    }
}

/// `φ(k) = value` from budget `at` on; indices past the table diverge.
pub struct Table {
    pub entries: Vec<(u64, u64)>,
}

impl Opponent for Table {
    fn label(&self) -> String {
        let cells: Vec<String> = self.entries.iter().map(|(v, at)| format!("{v}@{at}")).collect();
        format!("table({})", cells.join(","))
    }

    fn query(&self, k: u64, budget: u64, _: &[Jump]) -> Option<u64> {
        let &(v, at) = self.entries.get(k as usize)?;
        (budget >= at).then_some(v)
    }

    fn diverges_everywhere(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `divergent`, `echo(d)` or `table(v@t,…)`.
pub fn parse_opponent(label: &str) -> Result<Box<dyn Opponent>> {
    let bad = || Error::InvalidParameter(format!("unknown opponent {label:?}"));
    let label = label.trim();
    if label == "divergent" {
        return Ok(Box::new(Divergent));
    }
    let (head, rest) = label.split_once('(').ok_or_else(bad)?;
    let inner = rest.strip_suffix(')').ok_or_else(bad)?;
    match head {
        "echo" => Ok(Box::new(Echo { delay: inner.trim().parse().map_err(|_| bad())? })),
        "table" => {
            let mut entries = Vec::new();
            for cell in inner.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                let (v, at) = cell.split_once('@').ok_or_else(bad)?;
                entries.push((v.trim().parse().map_err(|_| bad())?, at.trim().parse().map_err(|_| bad())?));
            }
            Ok(Box::new(Table { entries }))
        }
        _ => Err(bad()),
    }
}

/// Opponents used by the CLI default and the acceptance run: an echo that fires
/// attention on every visit, a fixed table, a delayed echo, and a divergent one.
pub fn builtin_suite() -> Vec<Box<dyn Opponent>> {
    vec![
        Box::new(Echo { delay: 0 }),
        Box::new(Table { entries: vec![(1, 3), (3, 40), (4, 200)] }),
        Box::new(Echo { delay: 5 }),
        Box::new(Divergent),
    ]
}

/// Running sums `Σ_{k∈W[t]} 2^(-φ(k))` with `W[t] = {k ≤ t : φ(k)[t]↓}`, one per
/// opponent, updated incrementally as the budget grows.
pub struct OpponentSums {
    states: Vec<SumState>,
}

struct SumState {
    admitted: u64,
    pending: BTreeSet<u64>,
    sum: Dyadic,
}

impl OpponentSums {
    pub fn new(count: usize) -> Self {
        OpponentSums {
            states: (0..count).map(|_| SumState { admitted: 0, pending: BTreeSet::new(), sum: Dyadic::zero() }).collect(),
        }
    }

    /// `S_i[budget]`; indices past the list behave as divergent opponents.
    pub fn sum(&mut self, opponents: &[Box<dyn Opponent>], i: u64, budget: u64, published: &[Jump]) -> Dyadic {
        let Some(op) = opponents.get(i as usize) else {
            return Dyadic::zero();
        };
        if op.diverges_everywhere() {
            return Dyadic::zero();
        }
        let st = &mut self.states[i as usize];
        while st.admitted <= budget {
            st.pending.insert(st.admitted);
            st.admitted += 1;
        }
        let done: Vec<(u64, u64)> =
            st.pending.iter().filter_map(|&k| op.query(k, budget, published).map(|v| (k, v))).collect();
        for (k, v) in done {
            st.pending.remove(&k);
            st.sum += Dyadic::pow2_neg(v);
        }
        st.sum.clone()
    }
}
