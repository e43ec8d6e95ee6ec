//! Names: exponent streams `f(0), f(1), …` denoting `Σ 2^(-f(k))`.
//!
//! A [`Name`] realizes values lazily from a pull-based source. When it carries an
//! [`EscapeBound`] `E`, every value pulled at index `k ≥ E(n)` must exceed `n`;
//! that witness is what makes multiplicities `u_f(n)` exactly observable, since
//! all occurrences of `n` lie in the prefix of length `E(n)`.

mod modulus;

pub use modulus::{
    group_modulus, grouped_to_sorted, regular_modulus, sorted_to_grouped, GroupDirection,
    ModulusCertificate, SeriesTarget,
};

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::dyadic::{sum_pow2_neg, Dyadic};
use crate::error::{Error, Result};

/// Monotone witness `E` for "tends to infinity": `f(k) > n` whenever `k ≥ E(n)`.
#[derive(Clone)]
pub struct EscapeBound {
    bound: Arc<dyn Fn(u64) -> usize + Send + Sync>,
    provenance: String,
}

impl EscapeBound {
    pub fn new(provenance: impl Into<String>, bound: impl Fn(u64) -> usize + Send + Sync + 'static) -> Self {
        EscapeBound { bound: Arc::new(bound), provenance: provenance.into() }
    }

    pub fn at(&self, n: u64) -> usize {
        (self.bound)(n)
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Largest `n ≤ cap` with `E(n) ≤ len`, i.e. the window whose multiplicities a
    /// prefix of length `len` determines exactly.
    pub fn certified_window(&self, len: usize, cap: u64) -> Option<u64> {
        if self.at(0) > len {
            return None;
        }
        let (mut lo, mut hi) = (0u64, cap);
        if self.at(hi) <= len {
            return Some(hi);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.at(mid) <= len {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

impl fmt::Debug for EscapeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EscapeBound({})", self.provenance)
    }
}

type ValueSource = Box<dyn Iterator<Item = Result<u64>> + Send>;

enum Source {
    Open(ValueSource),
    /// The realized values are the whole (finite) name.
    Finite,
    /// Values past the realized prefix are not known.
    Truncated,
}

pub struct Name {
    realized: Vec<u64>,
    source: Source,
    escape: Option<EscapeBound>,
    provenance: String,
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Name")
            .field("provenance", &self.provenance)
            .field("realized", &self.realized.len())
            .field("escape", &self.escape)
            .finish()
    }
}

impl Name {
    pub fn from_source(
        provenance: impl Into<String>,
        source: impl Iterator<Item = Result<u64>> + Send + 'static,
        escape: Option<EscapeBound>,
    ) -> Self {
        Name {
            realized: Vec::new(),
            source: Source::Open(Box::new(source)),
            escape,
            provenance: provenance.into(),
        }
    }

    /// `f(k) = k + a`.
    pub fn linear(a: u64) -> Self {
        let escape = EscapeBound::new(format!("E(n) = max(n + 1 - {a}, 0)"), move |n| {
            (n + 1).saturating_sub(a) as usize
        });
        Name::from_source(format!("linear({a})"), (0u64..).map(move |k| Ok(k + a)), Some(escape))
    }

    /// A finite name; its escape bound is exact (one past the last index holding a value `≤ n`).
    pub fn from_list(provenance: impl Into<String>, values: Vec<u64>) -> Self {
        let mut last_at_most: Vec<(u64, usize)> = Vec::new();
        let mut sorted: Vec<(u64, usize)> = values.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        sorted.sort_unstable();
        let mut running = 0usize;
        for (v, k) in sorted {
            running = running.max(k + 1);
            match last_at_most.last_mut() {
                Some(last) if last.0 == v => last.1 = running,
                _ => last_at_most.push((v, running)),
            }
        }
        let escape = EscapeBound::new("exact bound of a finite list", move |n| {
            match last_at_most.partition_point(|&(v, _)| v <= n) {
                0 => 0,
                i => last_at_most[i - 1].1,
            }
        });
        Name { realized: values, source: Source::Finite, escape: Some(escape), provenance: provenance.into() }
    }

    /// A known prefix whose continuation is unknown.
    pub fn truncated(provenance: impl Into<String>, values: Vec<u64>, escape: Option<EscapeBound>) -> Self {
        Name { realized: values, source: Source::Truncated, escape, provenance: provenance.into() }
    }

    /// The non-decreasing name enumerating each `n` exactly `u(n)` times.
    pub fn from_profile(
        provenance: impl Into<String>,
        u: Arc<dyn Fn(u64) -> BigUint + Send + Sync>,
    ) -> Self {
        let counts = u.clone();
        let escape = EscapeBound::new("E(n) = u(0) + … + u(n)", move |n| {
            let mut total: usize = 0;
            for v in 0..=n {
                let c = counts(v).to_usize().unwrap_or(usize::MAX);
                total = total.saturating_add(c);
                if total == usize::MAX {
                    break;
                }
            }
            total
        });
        let mut value = 0u64;
        let mut remaining = u(0).to_u64().unwrap_or(u64::MAX);
        let source = std::iter::from_fn(move || {
            while remaining == 0 {
                value += 1;
                remaining = u(value).to_u64().unwrap_or(u64::MAX);
            }
            remaining -= 1;
            Some(Ok(value))
        });
        Name::from_source(provenance, source, Some(escape))
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn escape(&self) -> Option<&EscapeBound> {
        self.escape.as_ref()
    }

    pub fn realized(&self) -> &[u64] {
        &self.realized
    }

    /// True once the name is known to end after its realized values.
    pub fn is_finite(&self) -> bool {
        matches!(self.source, Source::Finite)
    }

    /// Pulls values until `len` are realized, checking the escape bound on each.
    pub fn ensure(&mut self, len: usize) -> Result<()> {
        while self.realized.len() < len {
            let next = match &mut self.source {
                Source::Open(src) => src.next(),
                Source::Finite | Source::Truncated => None,
            };
            match next {
                Some(Ok(v)) => {
                    let k = self.realized.len();
                    if let Some(e) = &self.escape {
                        let bound = e.at(v);
                        if bound <= k {
                            return Err(Error::CertificateViolation { index: k, value: v, bound });
                        }
                    }
                    self.realized.push(v);
                }
                Some(Err(err)) => return Err(err),
                None => {
                    if let Source::Open(_) = self.source {
                        self.source = Source::Finite;
                    }
                    return Err(Error::Exhausted { requested: len, available: self.realized.len() });
                }
            }
        }
        Ok(())
    }

    pub fn prefix(&mut self, len: usize) -> Result<&[u64]> {
        self.ensure(len)?;
        Ok(&self.realized[..len])
    }

    /// Realizes as many values as exist up to `len` (fewer only for finite names).
    pub fn prefix_up_to(&mut self, len: usize) -> Result<&[u64]> {
        match self.ensure(len) {
            Ok(()) => Ok(&self.realized[..len]),
            Err(Error::Exhausted { .. }) if self.is_finite() => Ok(&self.realized),
            Err(e) => Err(e),
        }
    }

    pub fn get(&mut self, k: usize) -> Result<u64> {
        self.ensure(k + 1)?;
        Ok(self.realized[k])
    }

    /// Consumes the name into a fallible value stream; a finite name simply ends.
    pub fn into_values(self) -> impl Iterator<Item = Result<u64>> + Send {
        let mut name = self;
        let mut pos = 0usize;
        std::iter::from_fn(move || match name.ensure(pos + 1) {
            Ok(()) => {
                pos += 1;
                Some(Ok(name.realized[pos - 1]))
            }
            Err(Error::Exhausted { .. }) => None,
            Err(e) => Some(Err(e)),
        })
    }
}

/// Multiplicity counts `u(n)` for `n ∈ [0, n_max]` over an inspected prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UProfile {
    pub counts: Vec<u64>,
    pub complete: Vec<bool>,
    pub inspected: usize,
}

impl UProfile {
    /// Counts only; nothing is marked complete.
    pub fn of_values(values: &[u64], n_max: u64) -> Self {
        let mut counts = vec![0u64; n_max as usize + 1];
        for &v in values {
            if v <= n_max {
                counts[v as usize] += 1;
            }
        }
        let complete = vec![false; counts.len()];
        UProfile { counts, complete, inspected: values.len() }
    }

    pub fn n_max(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn count(&self, n: u64) -> u64 {
        self.counts.get(n as usize).copied().unwrap_or(0)
    }

    pub fn is_complete(&self, n: u64) -> bool {
        self.complete.get(n as usize).copied().unwrap_or(false)
    }

    /// Largest `n` such that every entry `0..=n` is complete.
    pub fn complete_window(&self) -> Option<u64> {
        let run = self.complete.iter().take_while(|&&c| c).count();
        (run > 0).then(|| run as u64 - 1)
    }

    /// `Σ_{n ≤ n_max} u(n) · 2^(-n)` over the counted window.
    pub fn grouped_sum(&self) -> Dyadic {
        self.counts
            .iter()
            .enumerate()
            .map(|(n, &c)| Dyadic::from_integer(c) * Dyadic::pow2_neg(n as u64))
            .sum()
    }
}

/// Multiplicity profile of the first `prefix_len` values. Entry `n` is complete
/// when the escape bound guarantees no later occurrence (`E(n) ≤ prefix_len`).
pub fn u_profile(f: &mut Name, n_max: u64, prefix_len: usize) -> Result<UProfile> {
    let values = f.prefix_up_to(prefix_len)?.to_vec();
    let mut profile = UProfile::of_values(&values, n_max);
    let inspected = values.len();
    if let Some(e) = f.escape() {
        for n in 0..=n_max {
            profile.complete[n as usize] = e.at(n) <= inspected;
        }
    }
    Ok(profile)
}

/// Non-decreasing rearrangement of a prefix.
///
/// With an escape bound the result is exactly the prefix of the true `f*`
/// covering every value `≤ n` for the largest `n` with `E(n) ≤ prefix_len`, and it
/// keeps `E` as its own witness (no more than `E(n)` values are `≤ n`).
pub fn star(f: &mut Name, prefix_len: usize) -> Result<Name> {
    let mut sorted = f.prefix_up_to(prefix_len)?.to_vec();
    sorted.sort_unstable();
    let provenance = format!("star({})", f.provenance());
    if f.is_finite() && sorted.len() == f.realized().len() {
        let mut name = Name::from_list(provenance, sorted);
        if let Some(e) = f.escape() {
            name.escape = Some(e.clone());
        }
        return Ok(name);
    }
    match f.escape() {
        Some(e) => {
            let cap = sorted.last().copied().unwrap_or(0);
            let keep = match e.certified_window(sorted.len(), cap) {
                Some(n) => sorted.partition_point(|&v| v <= n),
                None => 0,
            };
            sorted.truncate(keep);
            Ok(Name::truncated(provenance, sorted, Some(e.clone())))
        }
        None => Ok(Name::truncated(provenance, sorted, None)),
    }
}

/// A permutation of `[0, len)` given by `σ(k) = map[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Permutation { map: (0..len).collect() }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("{map:?} is not a permutation")));
            }
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn at(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// `f ∘ σ` on a slice of length `len()`.
    pub fn apply(&self, f: &[u64]) -> Vec<u64> {
        self.map.iter().map(|&i| f[i]).collect()
    }
}

/// `σ` with `f ∘ σ = g` for two finite value lists holding the same multiset.
/// Equal values are matched in ascending index order.
pub fn permutation_between(f: &[u64], g: &[u64]) -> Result<Permutation> {
    if f.len() != g.len() {
        return Err(Error::NoPermutation(format!("lengths differ: {} vs {}", f.len(), g.len())));
    }
    let pairs = match_values(f, g)?;
    let mut map = vec![0usize; g.len()];
    for (gk, fk) in pairs {
        map[gk] = fk;
    }
    Permutation::from_map(map)
}

fn match_values(f: &[u64], g: &[u64]) -> Result<Vec<(usize, usize)>> {
    use std::collections::{BTreeMap, VecDeque};
    let mut slots: BTreeMap<u64, VecDeque<usize>> = BTreeMap::new();
    for (k, &v) in f.iter().enumerate() {
        slots.entry(v).or_default().push_back(k);
    }
    let mut pairs = Vec::with_capacity(g.len());
    for (k, &v) in g.iter().enumerate() {
        let fk = slots
            .get_mut(&v)
            .and_then(|q| q.pop_front())
            .ok_or_else(|| Error::NoPermutation(format!("value {v} occurs more often in g")))?;
        pairs.push((k, fk));
    }
    if let Some((v, _)) = slots.iter().find(|(_, q)| !q.is_empty()) {
        return Err(Error::NoPermutation(format!("value {v} occurs more often in f")));
    }
    Ok(pairs)
}

/// Index matching `g(k) = f(σ(k))` for all occurrences of values `≤ window`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowMatching {
    pub window: u64,
    /// `(k, σ(k))` pairs sorted by `k`.
    pub pairs: Vec<(usize, usize)>,
}

/// Matches occurrences of values `≤ window` in `f` and `g`. Both names need escape
/// bounds so that every such occurrence is realized.
pub fn find_permutation(f: &mut Name, g: &mut Name, window: u64) -> Result<WindowMatching> {
    let ef = f.escape().ok_or_else(|| Error::MissingWitness(f.provenance().to_string()))?.at(window);
    let eg = g.escape().ok_or_else(|| Error::MissingWitness(g.provenance().to_string()))?.at(window);
    let fv: Vec<(usize, u64)> = indexed_at_most(f.prefix_up_to(ef)?, window);
    let gv: Vec<(usize, u64)> = indexed_at_most(g.prefix_up_to(eg)?, window);
    let fvals: Vec<u64> = fv.iter().map(|p| p.1).collect();
    let gvals: Vec<u64> = gv.iter().map(|p| p.1).collect();
    let pairs = match_values(&fvals, &gvals)?
        .into_iter()
        .map(|(gk, fk)| (gv[gk].0, fv[fk].0))
        .collect();
    Ok(WindowMatching { window, pairs })
}

fn indexed_at_most(values: &[u64], window: u64) -> Vec<(usize, u64)> {
    values.iter().copied().enumerate().filter(|&(_, v)| v <= window).collect()
}

/// `Σ_{k<n} 2^(-f(k))`.
pub fn partial_sum(f: &mut Name, n: usize) -> Result<Dyadic> {
    Ok(sum_pow2_neg(f.prefix(n)?))
}

/// `(Σ_{k=n}^{len-1} 2^(-f*(k)), Σ_{k=n}^{len-1} 2^(-f(σ(k))))` over a prefix of
/// length `len = values.len()`; the first component never exceeds the second.
pub fn compare_tails(values: &[u64], sigma: &Permutation, n: usize) -> Result<(Dyadic, Dyadic)> {
    if sigma.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "permutation of length {} for a prefix of length {}",
            sigma.len(),
            values.len()
        )));
    }
    let n = n.min(values.len());
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let reordered = sigma.apply(values);
    Ok((sum_pow2_neg(&sorted[n..]), sum_pow2_neg(&reordered[n..])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_examples() {
        let mut f = Name::from_list("t", vec![3, 1, 2, 1, 3]);
        let p = u_profile(&mut f, 3, 5).unwrap();
        assert_eq!(p.counts, vec![0, 2, 1, 2]);

        let mut id = Name::linear(0);
        let p = u_profile(&mut id, 4, 5).unwrap();
        assert_eq!(p.counts, vec![1; 5]);
        assert!(p.complete.iter().all(|&c| c));

        let mut shifted = Name::linear(1);
        let p = u_profile(&mut shifted, 0, 3).unwrap();
        assert_eq!(p.counts, vec![0]);
        assert!(p.is_complete(0));
    }

    #[test]
    fn escape_violation_is_reported() {
        let escape = EscapeBound::new("claims values > n from index n", |n| n as usize);
        let mut f = Name::from_source("bad", [5u64, 0].into_iter().map(Ok), Some(escape));
        assert!(matches!(f.ensure(2), Err(Error::CertificateViolation { index: 1, value: 0, .. })));
    }

    #[test]
    fn star_examples() {
        let mut f = Name::from_list("t", vec![3, 1, 2, 1, 3]);
        assert_eq!(star(&mut f, 5).unwrap().realized(), &[1, 1, 2, 3, 3]);
        let mut f = Name::from_list("t", vec![1, 2, 3]);
        assert_eq!(star(&mut f, 3).unwrap().realized(), &[1, 2, 3]);
        let mut f = Name::linear(0);
        assert_eq!(star(&mut f, 6).unwrap().realized(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn star_keeps_only_certified_values() {
        // values 0..: 4, 0, 1, 2, 3, 5, 6, ...; 4 appears early so E(n) = n + 2 for n >= 0.
        let escape = EscapeBound::new("n + 2", |n| n as usize + 2);
        let src = [4u64, 0, 1, 2, 3].into_iter().chain(5..).map(Ok);
        let mut f = Name::from_source("t", src, Some(escape));
        let s = star(&mut f, 4).unwrap();
        // E(2) = 4 <= 4 but E(3) = 5 > 4: only values <= 2 are certified.
        assert_eq!(s.realized(), &[0, 1, 2]);
    }

    #[test]
    fn permutation_examples() {
        let s = permutation_between(&[2, 1], &[1, 2]).unwrap();
        assert_eq!(s.as_slice(), &[1, 0]);
        let s = permutation_between(&[1, 2, 3], &[1, 2, 3]).unwrap();
        assert_eq!(s, Permutation::identity(3));
        let s = permutation_between(&[1, 1, 2], &[2, 1, 1]).unwrap();
        assert_eq!(s.apply(&[1, 1, 2]), vec![2, 1, 1]);
        assert!(permutation_between(&[1, 1], &[1, 2]).is_err());
    }

    #[test]
    fn windowed_matching_needs_witness_and_equal_profiles() {
        let mut f = Name::from_list("f", vec![2, 0, 1, 7]);
        let mut g = Name::from_list("g", vec![0, 1, 2, 9]);
        let m = find_permutation(&mut f, &mut g, 2).unwrap();
        assert_eq!(m.pairs, vec![(0, 1), (1, 2), (2, 0)]);

        let mut h = Name::from_list("h", vec![0, 0, 2]);
        let mut f = Name::from_list("f", vec![2, 0, 1, 7]);
        assert!(matches!(find_permutation(&mut f, &mut h, 2), Err(Error::NoPermutation(_))));

        let mut bare = Name::from_source("bare", (0u64..).map(Ok), None);
        let mut f = Name::linear(0);
        assert!(matches!(find_permutation(&mut f, &mut bare, 3), Err(Error::MissingWitness(_))));
    }

    #[test]
    fn partial_sum_examples() {
        let mut f = Name::linear(1);
        assert_eq!(partial_sum(&mut f, 3).unwrap(), "7/2^3".parse().unwrap());
        assert_eq!(partial_sum(&mut f, 0).unwrap(), Dyadic::zero());
        let mut q = Name::from_list("q", vec![2, 2, 2, 2]);
        assert_eq!(partial_sum(&mut q, 4).unwrap(), Dyadic::one());
        assert!(matches!(partial_sum(&mut q, 5), Err(Error::Exhausted { .. })));
    }

    #[test]
    fn compare_tails_examples() {
        let (a, b) = compare_tails(&[3, 1, 2], &Permutation::identity(3), 1).unwrap();
        assert_eq!(a, "3/2^3".parse().unwrap());
        assert_eq!(b, "3/2^2".parse().unwrap());
        let sigma = Permutation::from_map(vec![2, 0, 1]).unwrap();
        let (a, b) = compare_tails(&[3, 1, 2], &sigma, 0).unwrap();
        assert_eq!(a, b);
        let (a, b) = compare_tails(&[1, 2, 2, 5], &Permutation::identity(4), 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_name_and_finite_escape() {
        let u: Arc<dyn Fn(u64) -> BigUint + Send + Sync> = Arc::new(BigUint::from);
        let mut f = Name::from_profile("u(n)=n", u);
        assert_eq!(f.prefix(6).unwrap(), &[1, 2, 2, 3, 3, 3]);
        assert_eq!(f.escape().unwrap().at(3), 6);

        let f = Name::from_list("l", vec![5, 1, 3, 1]);
        let e = f.escape().unwrap();
        assert_eq!((e.at(0), e.at(1), e.at(2), e.at(3), e.at(9)), (0, 4, 4, 4, 4));
    }
}
