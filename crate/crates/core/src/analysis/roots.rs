//! n-th root enclosures on a dyadic grid, by exact integer power comparison.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Default grid: `2^(-10)`.
pub const DEFAULT_GRID_BITS: u32 = 10;

/// `[lower, upper]` with `upper - lower` either zero (exact) or one grid step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enclosure {
    pub lower: Dyadic,
    pub upper: Dyadic,
}

impl Enclosure {
    pub fn point(x: Dyadic) -> Self {
        Enclosure { lower: x.clone(), upper: x }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn within(&self, lo: &Dyadic, hi: &Dyadic) -> bool {
        lo <= &self.lower && &self.upper <= hi
    }
}

/// Encloses `value^(1/n)` between consecutive multiples of `2^(-grid_bits)`.
pub fn nth_root_enclosure(value: &BigUint, n: u64, grid_bits: u32) -> Result<Enclosure> {
    if n == 0 {
        return Err(Error::InvalidParameter("0-th root is undefined".into()));
    }
    if value.is_zero() {
        return Ok(Enclosure::point(Dyadic::zero()));
    }
    let exp = u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("root index {n} too large")))?;
    let scaled = value << (grid_bits as u64 * n);
    // j = floor(2^bits · value^(1/n)) lies below 2^(bits + ceil(bits(value)/n))
    let hi_bits = grid_bits as u64 + value.bits().div_ceil(n) + 1;
    let (mut lo, mut hi) = (BigUint::zero(), BigUint::one() << hi_bits);
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1u32;
        if mid.pow(exp) <= scaled {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lower = Dyadic::new(lo.clone().into(), grid_bits as u64);
    if lo.pow(exp) == scaled {
        Ok(Enclosure::point(lower))
    } else {
        Ok(Enclosure { upper: Dyadic::new((lo + 1u32).into(), grid_bits as u64), lower })
    }
}

/// Per-index root enclosures over a window plus the enclosures of their min and max.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootWindow {
    pub per_index: Vec<(u64, Enclosure)>,
    pub min: Enclosure,
    pub max: Enclosure,
    pub argmax: u64,
}

impl RootWindow {
    /// The hull `[min.lower, max.upper]` of all n-th roots on the window.
    pub fn hull(&self) -> Enclosure {
        Enclosure { lower: self.min.lower.clone(), upper: self.max.upper.clone() }
    }
}

/// Root enclosures of `u(n)` for each `n` in `window` (which must not contain 0).
pub fn root_window(
    entries: impl IntoIterator<Item = (u64, BigUint)>,
    grid_bits: u32,
) -> Result<RootWindow> {
    let mut per_index = Vec::new();
    for (n, v) in entries {
        per_index.push((n, nth_root_enclosure(&v, n, grid_bits)?));
    }
    if per_index.is_empty() {
        return Err(Error::InvalidParameter("empty window".into()));
    }
    let pick = |better: fn(&Dyadic, &Dyadic) -> bool| {
        let mut best = &per_index[0];
        for e in &per_index[1..] {
            if better(&e.1.lower, &best.1.lower) || (e.1.lower == best.1.lower && better(&e.1.upper, &best.1.upper)) {
                best = e;
            }
        }
        best.clone()
    };
    let (argmax, max) = pick(|a, b| a > b);
    let (_, min) = pick(|a, b| a < b);
    Ok(RootWindow { per_index, min, max, argmax })
}
