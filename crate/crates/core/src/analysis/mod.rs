//! Series toolbox: root test with remainder, prefix-sum series, root-growth
//! estimates and the `r` generators used by the diagonal construction.

mod closed_form;
mod poly;
mod rho;
mod rootbound;
mod roots;

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

pub use closed_form::{ProfileModel, TailModel};
pub use poly::Polynomial;
pub use rho::{rho_generator, RationalSeq, RhoGenerator, RhoSpec, SEQ_WINDOW};
pub use rootbound::{modulus_from_root_bound, root_test_bound, RootBound, GRID_DEPTH};
pub use roots::{nth_root_enclosure, root_window, Enclosure, RootWindow, DEFAULT_GRID_BITS};

use crate::error::{Error, Result};
use crate::names::{ModulusCertificate, SeriesTarget};

/// A function `ℕ → ℕ`, read as multiplicities or weights.
pub type Multiplicity = Arc<dyn Fn(u64) -> BigUint + Send + Sync>;

/// `g(n) = Σ_{k=0}^{n+c} f(k)`.
pub fn prefix_sum_name(f: Multiplicity, c: u64) -> Multiplicity {
    Arc::new(move |n| (0..=n + c).fold(BigUint::zero(), |acc, k| acc + f(k)))
}

/// Both sides of the prefix-sum remainder identity
///
/// `Σ_{k≥n} g(k) 2^(-k) = 2^(-n+1) Σ_{k<n+c} f(k) + 2^(c+1) Σ_{k≥n+c} f(k) 2^(-k)`
///
/// with `g(k) = Σ_{j≤k+c} f(j)`. The left side comes from a closed form for `g`,
/// the right side from the values and closed-form tail of `f`.
pub fn remainder_identity_check(f: &TailModel, c: u64, n: u64) -> Result<(BigRational, BigRational)> {
    let left = f.prefix_sum_tail(c, n)?;
    let head: BigRational = (0..n + c).map(|k| f.value(k)).sum();
    let two = BigRational::from_integer(2.into());
    let right = head * &two / num_traits::pow(two.clone(), n as usize) + num_traits::pow(two, c as usize + 1) * f.tail(n + c)?;
    Ok((left, right))
}

/// `s(n) = 2 · r(n + d + 2)` for the prefix-sum series, given a modulus `r` of
/// `Σ f(k) 2^(-k) ≤ 2^d`.
pub fn prefix_sum_modulus(r: &ModulusCertificate, d: u64, c: u64) -> Result<ModulusCertificate> {
    if d < c {
        return Err(Error::InvalidParameter(format!("d = {d} must be at least c = {c}")));
    }
    let inner = r.clone();
    Ok(ModulusCertificate::new(SeriesTarget::Weighted, format!("2·r(n + {d} + 2) with r = {}", r.provenance()), move |n| {
        inner.at(n.saturating_add(d + 2)).saturating_mul(2)
    })
    .inherit_conditions(&[r])
    .with_condition("r is increasing")
    .with_condition(format!("sum of f(k) 2^-k <= 2^{d}")))
}

/// Root enclosures of `u(n)` for `n ∈ [lo, hi]`.
pub fn root_sequence_estimate(u: &Multiplicity, lo: u64, hi: u64, grid_bits: u32) -> Result<RootWindow> {
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty window [{lo}, {hi}]")));
    }
    if lo == 0 {
        return Err(Error::InvalidParameter("window must start at n >= 1".into()));
    }
    root_window((lo..=hi).map(|n| (n, u(n))), grid_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;

    fn mult(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Multiplicity {
        Arc::new(move |n| BigUint::from(f(n)))
    }

    fn alternating() -> Multiplicity {
        Arc::new(|k| if k % 2 == 0 { BigUint::from(1u32) << k } else { BigUint::from(1u32) })
    }

    #[test]
    fn prefix_sums() {
        assert_eq!(prefix_sum_name(mult(|k| k + 1), 0)(2), BigUint::from(6u32));
        assert!(prefix_sum_name(mult(|_| 0), 3)(7).is_zero());
        assert_eq!(prefix_sum_name(alternating(), 0)(3), BigUint::from(7u32));
    }

    #[test]
    fn identity_examples() {
        for (model, c, n) in [(TailModel::linear(1), 0, 0), (TailModel::constant(1), 0, 2), (TailModel::linear(1), 2, 3)] {
            let (l, r) = remainder_identity_check(&model, c, n).unwrap();
            assert_eq!(l, r);
        }
        let geo = TailModel::geometric(BigRational::new(3.into(), 2.into())).unwrap();
        let (l, r) = remainder_identity_check(&geo, 2, 5).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn prefix_modulus_examples() {
        let r = ModulusCertificate::new(SeriesTarget::Weighted, "n+1", |n| n + 1);
        let s = prefix_sum_modulus(&r, 0, 0).unwrap();
        assert_eq!(s.at(0), 6);
        assert_eq!(s.at(3), 12);
        let r = ModulusCertificate::new(SeriesTarget::Weighted, "n", |n| n);
        assert_eq!(prefix_sum_modulus(&r, 1, 0).unwrap().at(0), 6);
        assert!(prefix_sum_modulus(&r, 0, 1).is_err());
    }

    #[test]
    fn prefix_modulus_validates_for_constant_one() {
        // Σ 2^-k = 2 = 2^1, modulus r(n) = n + 1
        let r = ModulusCertificate::new(SeriesTarget::Weighted, "n+1", |n| n + 1);
        let s = prefix_sum_modulus(&r, 1, 0).unwrap();
        let model = TailModel::constant(1);
        s.validate(&|m| Dyadic::from_rational(&model.prefix_sum_tail(0, m).unwrap()).unwrap(), 16)
            .unwrap();
    }

    #[test]
    fn root_estimates() {
        let w = root_sequence_estimate(&mult(|_| 1), 1, 10, 10).unwrap();
        assert_eq!(w.hull(), Enclosure::point(Dyadic::one()));
        let pow2: Multiplicity = Arc::new(|n| BigUint::from(1u32) << n);
        let w = root_sequence_estimate(&pow2, 1, 10, 10).unwrap();
        assert_eq!(w.hull(), Enclosure::point(Dyadic::from_integer(2)));
        let g = prefix_sum_name(alternating(), 0);
        let w = root_sequence_estimate(&g, 29, 30, 10).unwrap();
        let hull = w.hull();
        assert!(hull.lower.to_rational() >= BigRational::new(19.into(), 10.into()));
        assert!(hull.upper.to_rational() <= BigRational::new(21.into(), 10.into()));
        assert!(root_sequence_estimate(&g, 5, 4, 10).is_err());
    }
}
