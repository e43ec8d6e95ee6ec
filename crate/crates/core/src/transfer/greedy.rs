use num_bigint::Sign;
use num_traits::ToPrimitive;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Most copies of exponent 0 a single call may emit.
pub const MAX_UNIT_JUMPS: u64 = 1 << 24;

/// Greedy binary decomposition of `target - current`, truncated after bit
/// `slack`. The new sum lands in `(target - 2^(-slack), target]`.
///
/// Whole units come first as copies of exponent 0, then the fractional bits in
/// ascending exponent order.
pub fn greedy_dyadic_increment(current: &Dyadic, target: &Dyadic, slack: u64) -> Result<Vec<u64>> {
    let diff = target - current;
    if diff.is_negative() {
        return Err(Error::InvalidParameter(format!("target {target} below current {current}")));
    }
    let scaled = diff.floor_at(slack);
    let (sign, magnitude) = scaled.into_parts();
    debug_assert_ne!(sign, Sign::Minus);
    let units = (&magnitude >> slack).to_u64().unwrap_or(u64::MAX);
    if units > MAX_UNIT_JUMPS {
        return Err(Error::BudgetExceeded(format!("{units} unit jumps requested")));
    }
    let mut out = vec![0; units as usize];
    let top = magnitude.bits().min(slack);
    for i in (0..top).rev() {
        if magnitude.bit(i) {
            out.push(slack - i);
        }
    }
    Ok(out)
}
