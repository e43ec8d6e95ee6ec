//! Sum and product names with their moduli.

use crate::error::Error;
use crate::names::{EscapeBound, ModulusCertificate, Name, SeriesTarget};

/// `h(2n) = f(n)`, `h(2n+1) = g(n)`. Once one input is exhausted the other
/// continues alone.
pub fn sum_name(f: Name, g: Name) -> Name {
    let escape = match (f.escape(), g.escape()) {
        (Some(ef), Some(eg)) => {
            let (ef, eg) = (ef.clone(), eg.clone());
            Some(EscapeBound::new("2·max(E_f(n), E_g(n)) + 1", move |n| {
                ef.at(n).max(eg.at(n)).saturating_mul(2).saturating_add(1)
            }))
        }
        _ => None,
    };
    let provenance = format!("sum({}, {})", f.provenance(), g.provenance());
    let mut left = f.into_values();
    let mut right = g.into_values();
    let (mut left_done, mut right_done) = (false, false);
    let mut take_left = true;
    let source = std::iter::from_fn(move || loop {
        if left_done && right_done {
            return None;
        }
        let from_left = take_left;
        take_left = !take_left;
        if from_left && !left_done {
            match left.next() {
                None => left_done = true,
                item => return item,
            }
        } else if !from_left && !right_done {
            match right.next() {
                None => right_done = true,
                item => return item,
            }
        }
    });
    Name::from_source(provenance, source, escape)
}

/// `t(n) = max(r(n+1), s(n+1))` for the grouped series of `sum_name(f, g)`.
pub fn sum_modulus(r: &ModulusCertificate, s: &ModulusCertificate) -> ModulusCertificate {
    let (r1, s1) = (r.clone(), s.clone());
    ModulusCertificate::new(
        SeriesTarget::Grouped,
        format!("max(r(n+1), s(n+1)) with r = {}, s = {}", r.provenance(), s.provenance()),
        move |n| r1.at(n + 1).max(s1.at(n + 1)),
    )
    .inherit_conditions(&[r, s])
}

/// Cauchy product: diagonals `l = 0, 1, …`, and within a diagonal `k = 0..=l`,
/// emitting `f(k) + g(l - k)`. Cells beyond a finite input are skipped.
pub fn product_name(f: Name, g: Name) -> Name {
    let escape = match (f.escape(), g.escape()) {
        (Some(ef), Some(eg)) => {
            let (ef, eg) = (ef.clone(), eg.clone());
            // values ≤ n need k < E_f(n) and l - k < E_g(n), so l ≤ E_f(n) + E_g(n) - 2
            Some(EscapeBound::new("cells through diagonal E_f(n) + E_g(n) - 2", move |n| {
                let (a, b) = (ef.at(n), eg.at(n));
                if a == 0 || b == 0 {
                    return 0;
                }
                let d1 = a.saturating_add(b) - 1; // D + 1
                d1.saturating_mul(d1.saturating_add(1)) / 2
            }))
        }
        _ => None,
    };
    let provenance = format!("product({}, {})", f.provenance(), g.provenance());
    let (mut f, mut g) = (f, g);
    let (mut l, mut k) = (0usize, 0usize);
    let source = std::iter::from_fn(move || loop {
        if f.is_finite() && g.is_finite() {
            let (lf, lg) = (f.realized().len(), g.realized().len());
            if lf == 0 || lg == 0 || l > lf + lg - 2 {
                return None;
            }
        }
        let (kk, ll) = (k, l);
        if k == l {
            l += 1;
            k = 0;
        } else {
            k += 1;
        }
        let a = match f.get(kk) {
            Ok(v) => v,
            Err(Error::Exhausted { .. }) => continue,
            Err(e) => return Some(Err(e)),
        };
        let b = match g.get(ll - kk) {
            Ok(v) => v,
            Err(Error::Exhausted { .. }) => continue,
            Err(e) => return Some(Err(e)),
        };
        return Some(Ok(a + b));
    });
    Name::from_source(provenance, source, escape)
}

/// `t(n) = 2 · max(r(n+c+2), s(n+c+2))`, counting diagonals of the product of the
/// sorted inputs.
pub fn product_modulus(r: &ModulusCertificate, s: &ModulusCertificate, c: u64) -> ModulusCertificate {
    let (r1, s1) = (r.clone(), s.clone());
    ModulusCertificate::new(
        SeriesTarget::Diagonal,
        format!("2·max(r(n+{c}+2), s(n+{c}+2)) with r = {}, s = {}", r.provenance(), s.provenance()),
        move |n| r1.at(n + c + 2).max(s1.at(n + c + 2)).saturating_mul(2),
    )
    .inherit_conditions(&[r, s])
    .with_condition(format!("2^{c} >= max(x, y)"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::u_profile;

    #[test]
    fn sum_interleaves() {
        let mut h = sum_name(Name::linear(2), Name::linear(2));
        assert_eq!(h.prefix(6).unwrap(), &[2, 2, 3, 3, 4, 4]);
        let mut h = sum_name(Name::from_list("f", vec![7, 8]), Name::from_list("g", vec![1]));
        assert_eq!(h.prefix_up_to(10).unwrap(), &[7, 1, 8]);
    }

    #[test]
    fn sum_profile_adds() {
        let f = Name::from_list("f", vec![3, 1, 1, 4]);
        let g = Name::from_list("g", vec![1, 5, 9]);
        let mut h = sum_name(f, g);
        let p = u_profile(&mut h, 9, 100).unwrap();
        assert_eq!(p.count(1), 3);
        assert_eq!(p.count(5), 1);
        assert_eq!(p.count(2), 0);
    }

    #[test]
    fn sum_modulus_examples() {
        let r = ModulusCertificate::new(SeriesTarget::Grouped, "n+1", |n| n + 1);
        let s = ModulusCertificate::new(SeriesTarget::Grouped, "n+2", |n| n + 2);
        assert_eq!(sum_modulus(&r, &s).table(5), vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(sum_modulus(&r, &r).at(4), r.at(5));
    }

    #[test]
    fn product_enumerates_diagonals() {
        let mut h = product_name(Name::linear(1), Name::linear(1));
        assert_eq!(h.prefix(6).unwrap(), &[2, 3, 3, 4, 4, 4]);
        let mut h = product_name(Name::from_list("f", vec![1, 2]), Name::from_list("g", vec![10, 20, 30]));
        assert_eq!(h.prefix_up_to(100).unwrap(), &[11, 21, 12, 31, 22, 32]);
    }

    #[test]
    fn product_escape_is_respected() {
        let mut h = product_name(Name::linear(1), Name::linear(1));
        h.ensure(40 * 41 / 2).unwrap();
        let p = u_profile(&mut h, 20, 40 * 41 / 2).unwrap();
        for n in 2..=20 {
            assert!(p.is_complete(n));
            assert_eq!(p.count(n), n - 1);
        }
    }

    #[test]
    fn product_modulus_examples() {
        let r = ModulusCertificate::new(SeriesTarget::Sorted, "n+1", |n| n + 1);
        let t = product_modulus(&r, &r, 0);
        assert_eq!(t.at(0), 6);
        assert_eq!(t.at(5), 16);
    }
}
