use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Which series a modulus speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesTarget {
    /// `Σ 2^(-f(k))` in the name's own order.
    Raw,
    /// `Σ 2^(-f*(k))`.
    Sorted,
    /// `Σ u_f(k) · 2^(-k)`.
    Grouped,
    /// `Σ w(k) · 2^(-k)` for a multiplicity/weight function `w`.
    Weighted,
    /// Diagonal sums `Σ_l Σ_{k≤l} 2^(-f*(k) - g*(l-k))`; indices count diagonals.
    Diagonal,
}

/// A monotone index function `s` asserting `tail(s(n)) ≤ 2^(-n)` for its target.
#[derive(Clone)]
pub struct ModulusCertificate {
    index: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    target: SeriesTarget,
    provenance: String,
    conditions: Vec<String>,
}

impl fmt::Debug for ModulusCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulusCertificate")
            .field("target", &self.target)
            .field("provenance", &self.provenance)
            .field("conditions", &self.conditions)
            .finish()
    }
}

impl ModulusCertificate {
    pub fn new(
        target: SeriesTarget,
        provenance: impl Into<String>,
        index: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        ModulusCertificate {
            index: Arc::new(index),
            target,
            provenance: provenance.into(),
            conditions: Vec::new(),
        }
    }

    pub fn at(&self, n: u64) -> u64 {
        (self.index)(n)
    }

    pub fn target(&self) -> SeriesTarget {
        self.target
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Assumptions the certificate rests on beyond what was verified.
    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }

    pub fn is_conditional(&self) -> bool {
        !self.conditions.is_empty()
    }

    pub fn with_condition(mut self, condition: impl Into<String>) -> Self {
        self.conditions.push(condition.into());
        self
    }

    pub(crate) fn inherit_conditions(mut self, from: &[&ModulusCertificate]) -> Self {
        for c in from {
            self.conditions.extend(c.conditions.iter().cloned());
        }
        self
    }

    pub fn retarget(&self, target: SeriesTarget, provenance: impl Into<String>) -> Self {
        ModulusCertificate {
            index: self.index.clone(),
            target,
            provenance: provenance.into(),
            conditions: self.conditions.clone(),
        }
    }

    pub fn table(&self, up_to: u64) -> Vec<u64> {
        (0..=up_to).map(|n| self.at(n)).collect()
    }

    /// Checks monotonicity and `tail(s(n)) ≤ 2^(-n)` for `n ≤ up_to` against a tail
    /// oracle (an exact tail or a certified upper bound on it).
    pub fn validate(&self, tail: &dyn Fn(u64) -> Dyadic, up_to: u64) -> Result<()> {
        let mut previous = None;
        for n in 0..=up_to {
            let s = self.at(n);
            if let Some(p) = previous {
                if s < p {
                    return Err(Error::BoundViolation(format!(
                        "{}: s({n}) = {s} < s({}) = {p}",
                        self.provenance,
                        n - 1
                    )));
                }
            }
            previous = Some(s);
            let t = tail(s);
            if !t.le_pow2_neg(n) {
                return Err(Error::BoundViolation(format!(
                    "{}: tail at s({n}) = {s} is {t}, above 2^-{n}",
                    self.provenance
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupDirection {
    SortedToGrouped,
    GroupedToSorted,
}

/// Transfers a modulus between the sorted series and the grouped series.
///
/// `sorted_window` is a certified prefix of `f*`: it supplies the evidence for
/// `f*(k) ≤ k` in one direction and for `Σ u_f(k) 2^(-k) ≤ 2^c` in the other.
pub fn group_modulus(
    s: &ModulusCertificate,
    direction: GroupDirection,
    c: u32,
    sorted_window: &[u64],
) -> Result<ModulusCertificate> {
    match direction {
        GroupDirection::SortedToGrouped => sorted_to_grouped(s, sorted_window),
        GroupDirection::GroupedToSorted => grouped_to_sorted(s, c, sorted_window),
    }
}

/// Reuses `s` for the grouped series when the window shows `f*(k) ≤ k`. Otherwise
/// `s` is shifted by the largest observed excess `d = max(f*(k) - k)`, which is sound
/// whenever `f*(k) ≤ k + d` holds everywhere; that extrapolation is recorded as a
/// condition.
pub fn sorted_to_grouped(s: &ModulusCertificate, sorted_window: &[u64]) -> Result<ModulusCertificate> {
    if s.target() != SeriesTarget::Sorted {
        return Err(Error::InvalidParameter(format!("expected a sorted-series modulus, got {:?}", s.target())));
    }
    if sorted_window.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("window is not a sorted prefix".into()));
    }
    let excess = sorted_window
        .iter()
        .enumerate()
        .map(|(k, &v)| v.saturating_sub(k as u64))
        .max()
        .unwrap_or(0);
    let cert = if excess == 0 {
        s.retarget(SeriesTarget::Grouped, format!("{} (reused for grouped series)", s.provenance()))
            .with_condition(format!("f*(k) <= k beyond the inspected window of {}", sorted_window.len()))
    } else {
        let inner = s.clone();
        ModulusCertificate::new(
            SeriesTarget::Grouped,
            format!("{} shifted by {excess}", s.provenance()),
            move |n| inner.at(n).saturating_add(excess),
        )
        .inherit_conditions(&[s])
        .with_condition(format!("f*(k) <= k + {excess} beyond the inspected window of {}", sorted_window.len()))
    };
    Ok(cert)
}

/// `t(n) = Σ_{k<s(n)} 2^(c+k) = 2^c (2^s(n) - 1)`, saturating at `u64::MAX`.
pub fn grouped_to_sorted(s: &ModulusCertificate, c: u32, sorted_window: &[u64]) -> Result<ModulusCertificate> {
    if s.target() != SeriesTarget::Grouped {
        return Err(Error::InvalidParameter(format!("expected a grouped-series modulus, got {:?}", s.target())));
    }
    let observed = crate::dyadic::sum_pow2_neg(sorted_window);
    if observed > Dyadic::pow2(c as i64) {
        return Err(Error::BoundViolation(format!("grouped sum over window is {observed}, above 2^{c}")));
    }
    let inner = s.clone();
    Ok(ModulusCertificate::new(SeriesTarget::Sorted, format!("2^{c}·(2^s(n) - 1) from {}", s.provenance()), move |n| {
        let sn = inner.at(n);
        let geometric = if sn >= 64 { u64::MAX } else { (1u64 << sn) - 1 };
        if c >= 64 {
            if geometric == 0 {
                0
            } else {
                u64::MAX
            }
        } else {
            geometric.saturating_mul(1u64 << c)
        }
    })
    .inherit_conditions(&[s])
    .with_condition(format!("sum of u_f(k) 2^-k <= 2^{c}")))
}

/// `s(n) = n + c + 1` for the grouped series of a name with `u_f ≤ 2^c`.
pub fn regular_modulus(c: u32) -> ModulusCertificate {
    ModulusCertificate::new(SeriesTarget::Grouped, format!("n + {c} + 1 (u_f <= 2^{c})"), move |n| n + c as u64 + 1)
        .with_condition(format!("u_f(n) <= 2^{c} for all n"))
}
