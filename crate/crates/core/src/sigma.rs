//! Window estimates for the limsup of `u(n)^(1/n)` and how they behave under
//! sums and products of names.
//!
//! Nothing here computes the infimum over all names of a real; the outputs are
//! per-name estimates on a finite complete window.

use num_bigint::BigUint;
use serde::Serialize;

use crate::analysis::{root_window, RootWindow};
use crate::combinators::{product_name, sum_name};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::{u_profile, Name, UProfile};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaEstimate {
    /// Indices `1..=window` were used.
    pub window: u64,
    pub roots: RootWindow,
    /// The window maximum is below 1, as happens for sparse names.
    pub below_one: bool,
}

/// Encloses `max_{1≤n≤W} u(n)^(1/n)` where `W` is the complete window of `u`.
pub fn sigma_estimate(u: &UProfile, grid_bits: u32) -> Result<SigmaEstimate> {
    let window = match u.complete_window() {
        Some(w) if w >= 1 => w,
        _ => return Err(Error::InsufficientData("no complete index n >= 1".into())),
    };
    let roots = root_window((1..=window).map(|n| (n, BigUint::from(u.count(n)))), grid_bits)?;
    let below_one = roots.max.upper < Dyadic::one();
    Ok(SigmaEstimate { window, roots, below_one })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMode {
    Sum,
    Product,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreservationReport {
    pub mode: CombineMode,
    pub window: u64,
    pub u_f: Vec<u64>,
    pub u_g: Vec<u64>,
    pub u_h: Vec<u64>,
    /// Sum: `u_h = u_f + u_g`. Product: `u_h(n) = Σ_{a+b=n} u_f(a) u_g(b)`.
    pub identity_holds: bool,
    /// Sum: `u_h ≤ 2 max(u_f, u_g)`. Product: `u_h(n) ≤ (n+1) max u_f max u_g`.
    pub bound_holds: bool,
    pub roots_f: RootWindow,
    pub roots_g: RootWindow,
    pub roots_h: RootWindow,
    /// Sum: `max(σ_f, σ_g) ≤ σ_h ≤ 2 max(σ_f, σ_g)` up to grid width.
    /// Product: `σ_h` is at most the window max of `((n+1) max u_f max u_g)^(1/n)`.
    pub roots_consistent: bool,
    /// Root enclosures of the explicit product slack, product mode only.
    pub slack: Option<RootWindow>,
}

impl PreservationReport {
    pub fn holds(&self) -> bool {
        self.identity_holds && self.bound_holds && self.roots_consistent
    }
}

/// The prefix of `f` that contains every value `≤ window`, as a finite list.
fn certified_list(f: &mut Name, window: u64, label: &str) -> Result<(Name, UProfile)> {
    let escape = f.escape().cloned().ok_or_else(|| Error::MissingWitness(format!("{label} has no escape bound")))?;
    let len = escape.at(window);
    let profile = u_profile(f, window, len)?;
    if profile.complete_window().is_none_or(|w| w < window) {
        return Err(Error::InsufficientData(format!("{label} is not complete up to {window}")));
    }
    let values = f.prefix_up_to(len)?.to_vec();
    Ok((Name::from_list(label, values), profile))
}

fn roots(counts: &[u64], grid_bits: u32) -> Result<RootWindow> {
    root_window(counts.iter().enumerate().skip(1).map(|(n, &c)| (n as u64, BigUint::from(c))), grid_bits)
}

/// Combines certified prefixes of `f` and `g`, counts the result exactly on
/// `[0, window]`, and compares the counts and root maxima with the inputs.
pub fn sigma_preservation_check(
    f: &mut Name,
    g: &mut Name,
    mode: CombineMode,
    window: u64,
    grid_bits: u32,
) -> Result<PreservationReport> {
    if window == 0 {
        return Err(Error::InsufficientData("window must contain some n >= 1".into()));
    }
    let (lf, pf) = certified_list(f, window, "f")?;
    let (lg, pg) = certified_list(g, window, "g")?;
    let h = match mode {
        CombineMode::Sum => sum_name(lf, lg),
        CombineMode::Product => product_name(lf, lg),
    };
    let hv: Vec<u64> = h.into_values().collect::<Result<_>>()?;
    let u_h = UProfile::of_values(&hv, window).counts;
    let (u_f, u_g) = (pf.counts, pg.counts);
    let w = window as usize;
    let max_f = u_f.iter().copied().max().unwrap_or(0);
    let max_g = u_g.iter().copied().max().unwrap_or(0);
    let (identity_holds, bound_holds, bound_counts) = match mode {
        CombineMode::Sum => {
            let identity = (0..=w).all(|n| u_h[n] == u_f[n] + u_g[n]);
            let bound = (0..=w).all(|n| u_h[n] <= 2 * u_f[n].max(u_g[n]));
            (identity, bound, None)
        }
        CombineMode::Product => {
            let identity = (0..=w).all(|n| {
                let conv: u128 = (0..=n).map(|a| u_f[a] as u128 * u_g[n - a] as u128).sum();
                conv == u_h[n] as u128
            });
            let bounds: Vec<BigUint> =
                (0..=w).map(|n| BigUint::from(n + 1) * BigUint::from(max_f) * BigUint::from(max_g)).collect();
            let bound = (0..=w).all(|n| BigUint::from(u_h[n]) <= bounds[n]);
            (identity, bound, Some(bounds))
        }
    };
    let roots_f = roots(&u_f, grid_bits)?;
    let roots_g = roots(&u_g, grid_bits)?;
    let roots_h = roots(&u_h, grid_bits)?;
    let (roots_consistent, slack) = match bound_counts {
        None => {
            let lo = roots_f.max.lower.clone().max(roots_g.max.lower.clone());
            let hi = roots_f.max.upper.clone().max(roots_g.max.upper.clone());
            (lo <= roots_h.max.upper && roots_h.max.lower <= &hi + &hi, None)
        }
        Some(bounds) => {
            let slack = root_window(bounds.into_iter().enumerate().skip(1).map(|(n, b)| (n as u64, b)), grid_bits)?;
            (roots_h.max.lower <= slack.max.upper, Some(slack))
        }
    };
    Ok(PreservationReport {
        mode,
        window,
        u_f,
        u_g,
        u_h,
        identity_holds,
        bound_holds,
        roots_f,
        roots_g,
        roots_h,
        roots_consistent,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DEFAULT_GRID_BITS;
    use crate::names::EscapeBound;

    fn complete(counts: Vec<u64>) -> UProfile {
        let complete = vec![true; counts.len()];
        UProfile { counts, complete, inspected: 0 }
    }

    /// Injective-per-value name with `u(n) = 2^n` for `n ≤ cap`, as a finite list.
    fn powers(cap: u64) -> Name {
        let values: Vec<u64> = (0..=cap).flat_map(|n| std::iter::repeat_n(n, 1 << n)).collect();
        Name::from_list("2^n copies", values)
    }

    #[test]
    fn constant_profile_is_one() {
        let est = sigma_estimate(&complete(vec![1; 20]), DEFAULT_GRID_BITS).unwrap();
        assert_eq!(est.roots.max.lower, Dyadic::one());
        assert!(est.roots.max.is_exact());
        assert!(!est.below_one);
    }

    #[test]
    fn powers_of_two_are_exact() {
        let est = sigma_estimate(&complete((0..16).map(|n| 1u64 << n).collect()), 10).unwrap();
        assert_eq!(est.roots.max, crate::analysis::Enclosure::point(Dyadic::from_integer(2)));
        assert_eq!(est.roots.min, est.roots.max);
    }

    #[test]
    fn sparse_profile_is_flagged() {
        let est = sigma_estimate(&complete(vec![1, 0, 0, 0]), 10).unwrap();
        assert!(est.below_one);
    }

    #[test]
    fn incomplete_window_is_rejected() {
        let mut u = complete(vec![1, 1]);
        u.complete[1] = false;
        assert!(matches!(sigma_estimate(&u, 10), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn sum_of_identical_injective_names() {
        let out =
            sigma_preservation_check(&mut Name::linear(0), &mut Name::linear(0), CombineMode::Sum, 12, 10).unwrap();
        assert!(out.u_h.iter().all(|&c| c == 2));
        assert_eq!(out.roots_h.max, crate::analysis::Enclosure::point(Dyadic::from_integer(2)));
        assert!(out.holds());
    }

    #[test]
    fn sum_tracks_the_denser_input() {
        let out = sigma_preservation_check(&mut Name::linear(0), &mut powers(10), CombineMode::Sum, 10, 10).unwrap();
        assert!(out.holds());
        assert!(out.roots_h.max.upper >= out.roots_g.max.lower);
    }

    #[test]
    fn product_of_injective_names() {
        let out =
            sigma_preservation_check(&mut Name::linear(1), &mut Name::linear(1), CombineMode::Product, 16, 10)
                .unwrap();
        for n in 1..=16usize {
            assert_eq!(out.u_h[n], n as u64 - 1);
        }
        assert!(out.holds());
    }

    #[test]
    fn witnesses_are_required() {
        let mut bare = Name::truncated("bare", vec![1, 2, 3], None);
        assert!(matches!(
            sigma_preservation_check(&mut bare, &mut Name::linear(0), CombineMode::Sum, 2, 10),
            Err(Error::MissingWitness(_))
        ));
        let short = EscapeBound::new("loose", |n| n as usize + 10);
        let mut loose = Name::truncated("short", vec![0, 1], Some(short));
        assert!(sigma_preservation_check(&mut loose, &mut Name::linear(0), CombineMode::Sum, 2, 10).is_err());
    }
}
