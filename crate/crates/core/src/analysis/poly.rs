//! Polynomials over the rationals with exact weighted tails
//! `Σ_{k≥n} p(k) · 2^(-k)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `c_0 + c_1 x + … + c_d x^d`.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Polynomial {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn constant(c: i64) -> Self {
        Polynomial::from_integers(&[c])
    }

    /// `x + a`.
    pub fn linear(a: i64) -> Self {
        Polynomial::from_integers(&[a, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_int(&self, k: i64) -> BigRational {
        self.eval(&rat(k))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        Polynomial::new(
            (0..len)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Polynomial::new(vec![]);
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// `p(x + a)`.
    pub fn shift(&self, a: i64) -> Polynomial {
        let step = Polynomial::linear(a);
        let mut out = Polynomial::new(vec![]);
        for c in self.coeffs.iter().rev() {
            out = out.mul(&step).add(&Polynomial::new(vec![c.clone()]));
        }
        out
    }

    /// `P(m) = Σ_{k=0}^{m} p(k)`, built by Newton interpolation on `m = 0..=deg+1`.
    pub fn prefix_sum(&self) -> Polynomial {
        let points = self.degree() + 2;
        let mut values = Vec::with_capacity(points);
        let mut acc = BigRational::zero();
        for m in 0..points {
            acc += self.eval_int(m as i64);
            values.push(acc.clone());
        }
        // forward differences Δ^j P(0)
        let mut diffs = Vec::with_capacity(points);
        let mut row = values;
        while !row.is_empty() {
            diffs.push(row[0].clone());
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        let mut out = Polynomial::new(vec![]);
        let mut falling = Polynomial::constant(1); // C(x, j) built incrementally
        for (j, d) in diffs.iter().enumerate() {
            out = out.add(&falling.scale(d));
            let next = Polynomial::new(vec![rat(-(j as i64)), BigRational::one()]);
            falling = falling.mul(&next).scale(&BigRational::new(BigInt::one(), BigInt::from(j + 1)));
        }
        out
    }

    /// `Σ_{k≥n} p(k) · 2^(-k)`, exact.
    ///
    /// Writing `p(n + j) = Σ_i q_i j^i`, the tail is `2^(-n) Σ_i q_i M_i` with
    /// `M_i = Σ_{j≥0} j^i 2^(-j)`, where `M_0 = 2` and `M_i = Σ_{l<i} C(i,l) M_l`.
    pub fn weighted_tail(&self, n: u64) -> BigRational {
        self.scaled_tail(n) / BigRational::from_integer(BigInt::one() << n)
    }

    /// `2^n · Σ_{k≥n} p(k) · 2^(-k)`; avoids materializing `2^n` for large `n`.
    pub fn scaled_tail(&self, n: u64) -> BigRational {
        let shifted = self.shift(n as i64);
        let moments = moments(shifted.coeffs.len());
        shifted.coeffs.iter().zip(&moments).map(|(q, m)| q * m).sum()
    }
}

fn moments(count: usize) -> Vec<BigRational> {
    let mut m: Vec<BigInt> = Vec::with_capacity(count);
    for i in 0..count {
        if i == 0 {
            m.push(BigInt::from(2));
            continue;
        }
        let mut binom = BigInt::one();
        let mut acc = BigInt::zero();
        for (l, ml) in m.iter().enumerate() {
            acc += &binom * ml;
            binom = binom * BigInt::from(i - l) / BigInt::from(l + 1);
        }
        m.push(acc);
    }
    m.into_iter().map(BigRational::from_integer).collect()
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}·x"),
                _ => format!("{c}·x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}
