use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::analysis::{Multiplicity, RhoGenerator};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Largest index `m` the schedule search may inspect.
pub const DEFAULT_SCHEDULE_BUDGET: u64 = 1 << 20;

/// The search also stops once `r̂(m)` needs more bits than this, since fast
/// rates make every further tail evaluation expensive.
pub const MAX_R_HAT_BITS: u64 = 1 << 14;

type RHat = Box<dyn FnMut(u64) -> BigUint + Send>;
type TailBound = Box<dyn FnMut(u64) -> Dyadic + Send>;

/// `s(0) = min{m : r̂(m) > 0}`,
/// `s(n+1) = min{m > s(n) : T(m) ≤ 2^(-s(n)-1)}`
/// where `T(m)` is a certified upper bound on `Σ_{k≥m} r̂(k) 2^(-k)`.
///
/// Values are memoized; the search never looks past the budget.
pub struct Schedule {
    r_hat: RHat,
    tail: TailBound,
    values: Vec<u64>,
    budget: u64,
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Schedule").field("values", &self.values).field("budget", &self.budget).finish()
    }
}

/// `cum[m] = Σ_{k<m} r(k)`, grown on demand.
struct Cumulative {
    r: Multiplicity,
    cum: Vec<BigUint>,
}

impl Cumulative {
    fn below(&mut self, m: u64) -> BigUint {
        while self.cum.len() as u64 <= m {
            let k = self.cum.len() as u64 - 1;
            let next = &self.cum[k as usize] + (self.r)(k);
            self.cum.push(next);
        }
        self.cum[m as usize].clone()
    }
}

impl Schedule {
    pub fn from_parts(
        r_hat: impl FnMut(u64) -> BigUint + Send + 'static,
        tail: impl FnMut(u64) -> Dyadic + Send + 'static,
        budget: u64,
    ) -> Self {
        Schedule { r_hat: Box::new(r_hat), tail: Box::new(tail), values: Vec::new(), budget }
    }

    /// Schedule for `r̂(m) = Σ_{k≤m} r(k)`, bounding its weighted tail by
    /// `2^(1-m) Σ_{k<m} r(k) + 2 · tail_r(m)`.
    pub fn for_generator(gen: &RhoGenerator, budget: u64) -> Self {
        let shared = Arc::new(Mutex::new(Cumulative { r: gen.multiplicity(), cum: vec![BigUint::zero()] }));
        let for_r_hat = shared.clone();
        let gen = gen.clone();
        Schedule::from_parts(
            move |m| for_r_hat.lock().expect("schedule cache").below(m + 1),
            move |m| {
                let head = shared.lock().expect("schedule cache").below(m);
                Dyadic::from_biguint(head).mul_pow2(1 - m as i64) + gen.tail_upper(m).mul_pow2(1)
            },
            budget,
        )
    }

    pub fn r_hat(&mut self, m: u64) -> BigUint {
        (self.r_hat)(m)
    }

    pub fn tail_upper(&mut self, m: u64) -> Dyadic {
        (self.tail)(m)
    }

    /// Values computed so far.
    pub fn computed(&self) -> &[u64] {
        &self.values
    }

    pub fn at(&mut self, n: u64) -> Result<u64> {
        while self.values.len() as u64 <= n {
            let next = match self.values.last() {
                None => {
                    let mut m = 0;
                    while (self.r_hat)(m).is_zero() {
                        m += 1;
                        if m > self.budget {
                            return Err(Error::BudgetExceeded(format!("r_hat vanishes on 0..={}", self.budget)));
                        }
                    }
                    m
                }
                Some(&prev) => {
                    let mut m = prev + 1;
                    while !(self.tail)(m).le_pow2_neg(prev + 1) {
                        m += 1;
                        if (self.r_hat)(m).bits() > MAX_R_HAT_BITS {
                            return Err(Error::BudgetExceeded(format!(
                                "r_hat({m}) exceeds {MAX_R_HAT_BITS} bits before the tail drops below 2^-{}",
                                prev + 1
                            )));
                        }
                        if m > self.budget {
                            return Err(Error::BudgetExceeded(format!(
                                "no m <= {} certifies the tail below 2^-{}",
                                self.budget,
                                prev + 1
                            )));
                        }
                    }
                    m
                }
            };
            self.values.push(next);
        }
        Ok(self.values[n as usize])
    }
}

/// `s(0..=n)` for an arbitrary `r̂` and tail bound.
pub fn s_schedule(
    r_hat: impl FnMut(u64) -> BigUint + Send + 'static,
    tail_bound: impl FnMut(u64) -> Dyadic + Send + 'static,
    n: u64,
    budget: u64,
) -> Result<Vec<u64>> {
    let mut s = Schedule::from_parts(r_hat, tail_bound, budget);
    s.at(n)?;
    Ok(s.values)
}
