use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::{EscapeBound, Name, UProfile};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegainCheck {
    /// `r(2n)` for `g`, `r(2n+1)` for `h`.
    pub index: u64,
    /// `Σ_{k≥index} 2^(-g(k))` over the split prefix.
    pub tail: Dyadic,
    /// `Σ_{v≥index} u_g(v) 2^(-v)` over the split prefix.
    pub grouped: Dyadic,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    /// Values `≤ window` were split; their multiplicities in `f` are exact.
    pub window: u64,
    pub u_f: Vec<u64>,
    pub u_g: Vec<u64>,
    pub u_h: Vec<u64>,
    pub conserved: bool,
    /// `g(k) ≥ r(2n)` for every realized `k ≥ r(2n)`.
    pub staggered_g: bool,
    /// `h(k) ≥ r(2n+1)` for every realized `k ≥ r(2n+1)`.
    pub staggered_h: bool,
    pub regain_g: Vec<RegainCheck>,
    pub regain_h: Vec<RegainCheck>,
}

impl SplitReport {
    pub fn holds(&self) -> bool {
        self.conserved
            && self.staggered_g
            && self.staggered_h
            && self.regain_g.iter().chain(&self.regain_h).all(|c| c.holds)
    }
}

#[derive(Debug)]
pub struct SplitOutcome {
    pub g: Name,
    pub h: Name,
    pub g_values: Vec<u64>,
    pub h_values: Vec<u64>,
    pub report: SplitReport,
}

/// Largest `r(parity + 2n)` that is `≤ k`, or 0.
fn threshold(r: &dyn Fn(u64) -> u64, parity: u64, k: u64) -> u64 {
    let mut best = 0;
    let mut n = 0u64;
    loop {
        let v = r(parity + 2 * n);
        if v > k {
            return best;
        }
        best = v;
        n += 1;
    }
}

fn check_staggered(values: &[u64], r: &dyn Fn(u64) -> u64, parity: u64) -> bool {
    values.iter().enumerate().all(|(k, &v)| v >= threshold(r, parity, k as u64))
}

fn regain(values: &[u64], profile: &[u64], r: &dyn Fn(u64) -> u64, parity: u64) -> Vec<RegainCheck> {
    let mut out = Vec::new();
    let mut n = 0u64;
    loop {
        let index = r(parity + 2 * n);
        if index as usize >= values.len() {
            return out;
        }
        let tail: Dyadic = values[index as usize..].iter().map(|&v| Dyadic::pow2_neg(v)).sum();
        let grouped: Dyadic = profile
            .iter()
            .enumerate()
            .skip(index as usize)
            .map(|(v, &u)| Dyadic::from_integer(u) * Dyadic::pow2_neg(v as u64))
            .sum();
        out.push(RegainCheck { index, holds: tail <= grouped, tail, grouped });
        n += 1;
    }
}

fn window_escape(values: &[u64], window: u64) -> EscapeBound {
    let sorted = values.to_vec();
    EscapeBound::new(format!("exact count up to {window}"), move |n| {
        if n > window {
            usize::MAX
        } else {
            sorted.partition_point(|&v| v <= n)
        }
    })
}

/// Splits the certified part of `f` into two sorted names `g` and `h`.
///
/// Values `≤ W` are certified by the escape bound of `f` on a prefix of length
/// `prefix_len`. They are routed in ascending order: to `g` when that keeps
/// `g(k) ≥ r(2n)` for `k ≥ r(2n)`, otherwise to `h` under the odd-index rule.
pub fn split_name(f: &mut Name, r: &dyn Fn(u64) -> u64, prefix_len: usize) -> Result<SplitOutcome> {
    let escape = f.escape().cloned().ok_or_else(|| Error::MissingWitness("split needs an escape bound".into()))?;
    for n in 0..8 {
        if r(n + 1) <= r(n) {
            return Err(Error::InvalidParameter(format!("r is not increasing at {n}")));
        }
    }
    let values = f.prefix_up_to(prefix_len)?.to_vec();
    let cap = values.iter().copied().max().unwrap_or(0);
    let window = escape
        .certified_window(values.len(), cap)
        .ok_or_else(|| Error::InsufficientData(format!("no value is certified by a prefix of {}", values.len())))?;
    let mut certified: Vec<u64> = values.iter().copied().filter(|&v| v <= window).collect();
    certified.sort_unstable();
    let (mut g, mut h) = (Vec::new(), Vec::new());
    for v in certified {
        if threshold(r, 0, g.len() as u64) <= v {
            g.push(v);
        } else if threshold(r, 1, h.len() as u64) <= v {
            h.push(v);
        } else {
            return Err(Error::SplitInfeasible(format!(
                "value {v} is below both thresholds at g-index {} and h-index {}",
                g.len(),
                h.len()
            )));
        }
    }
    let u_f = UProfile::of_values(&values, window).counts;
    let u_g = UProfile::of_values(&g, window).counts;
    let u_h = UProfile::of_values(&h, window).counts;
    let conserved = u_f.iter().zip(&u_g).zip(&u_h).all(|((a, b), c)| *a == b + c);
    let report = SplitReport {
        window,
        conserved,
        staggered_g: check_staggered(&g, r, 0),
        staggered_h: check_staggered(&h, r, 1),
        regain_g: regain(&g, &u_g, r, 0),
        regain_h: regain(&h, &u_h, r, 1),
        u_f,
        u_g,
        u_h,
    };
    Ok(SplitOutcome {
        g: Name::truncated("split g", g.clone(), Some(window_escape(&g, window))),
        h: Name::truncated("split h", h.clone(), Some(window_escape(&h, window))),
        g_values: g,
        h_values: h,
        report,
    })
}
