//! Transfers between approximations and names: greedy increments, the Solovay
//! transfer, compiling set approximations, modulus composition and splitting.

mod compile;
mod greedy;
mod solovay;
mod split;

pub use compile::{
    compile_set_modulus, set_to_reordered_name, set_value, CompileOutcome, CompileReport, CompileStage,
    MultiplicityCheck,
};
pub use greedy::{greedy_dyadic_increment, MAX_UNIT_JUMPS};
pub use solovay::{solovay_transfer, ProfileCheck, SolovayOutcome, SolovayReport, SolovayStage};
pub use split::{split_name, RegainCheck, SplitOutcome, SplitReport};

use crate::names::{ModulusCertificate, SeriesTarget};

/// `t = s ∘ r` for the raw series, given a modulus `r` of the grouped series and
/// an escape witness `s` (`f(k) ≥ n` whenever `k ≥ s(n)`).
pub fn nearly_computable_upgrade(
    r: &ModulusCertificate,
    s: impl Fn(u64) -> u64 + Send + Sync + 'static,
) -> ModulusCertificate {
    let inner = r.clone();
    ModulusCertificate::new(SeriesTarget::Raw, format!("s(r(n)) with r = {}", r.provenance()), move |n| s(inner.at(n)))
        .inherit_conditions(&[r])
        .with_condition("f(k) >= n for all k >= s(n)")
}
