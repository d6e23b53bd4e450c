use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::conditions::factorial;
use super::trees::{binomial, OrderedTree};
use crate::error::{Error, Result};

/// Largest grade accepted by [`dim_free_lie`] and [`c_kappa`].
pub const MAX_LIE_GRADE: usize = 12;

/// Möbius function.
pub fn mobius(n: u64) -> i64 {
    assert!(n > 0, "mobius is defined on positive integers");
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Dimension `ν_n` of the grade-`n` part of the free Lie algebra over
/// ordered trees, `(1/2n) Σ_{d|n} μ(d) C(2n/d, n/d)`.
pub fn dim_free_lie(n: usize) -> Result<u64> {
    if n == 0 || n > MAX_LIE_GRADE {
        return Err(Error::domain(format!("grade must be in 1..={MAX_LIE_GRADE}, got {n}")));
    }
    let n = n as u64;
    let sum: i64 = (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| mobius(d) * binomial(2 * n / d, n / d) as i64)
        .sum();
    Ok((sum / (2 * n as i64)) as u64)
}

/// Multiplicities `κ = (κ₁,…,κ_ν)` of the distinct subtrees at a root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtreeMultiset {
    kappa: Vec<usize>,
}

impl SubtreeMultiset {
    pub fn new(kappa: Vec<usize>) -> Result<Self> {
        if kappa.is_empty() || kappa.contains(&0) {
            return Err(Error::domain(format!("multiplicities must be positive, got {kappa:?}")));
        }
        Ok(Self { kappa })
    }

    /// Multiplicities in order of first appearance among the root's children.
    pub fn of_tree(t: &OrderedTree) -> Result<Self> {
        let mut distinct: Vec<&OrderedTree> = Vec::new();
        let mut kappa: Vec<usize> = Vec::new();
        for c in t.children() {
            match distinct.iter().position(|d| *d == c) {
                Some(i) => kappa[i] += 1,
                None => {
                    distinct.push(c);
                    kappa.push(1);
                }
            }
        }
        Self::new(kappa)
    }

    pub fn parts(&self) -> &[usize] {
        &self.kappa
    }

    /// `|κ| = Σκᵢ`.
    pub fn total(&self) -> usize {
        self.kappa.iter().sum()
    }
}

/// Dimension `c(κ)` of the span, inside the free Lie algebra, of the
/// trees obtained by permuting a root's subtrees:
/// `(1/|κ|) Σ_{d|κ} μ(d) (|κ|/d)! / Π(κᵢ/d)!`.
pub fn c_kappa(kappa: &SubtreeMultiset) -> Result<u64> {
    let total = kappa.total();
    if total > MAX_LIE_GRADE {
        return Err(Error::domain(format!("|κ| = {total} exceeds {MAX_LIE_GRADE}")));
    }
    let g = kappa.parts().iter().fold(0usize, |acc, &k| acc.gcd(&k));
    let mut sum = BigInt::zero();
    for d in (1..=g).filter(|d| g % d == 0) {
        let mut term = factorial(total / d);
        for &k in kappa.parts() {
            term /= factorial(k / d);
        }
        sum += term * mobius(d as u64);
    }
    let (q, r) = sum.div_rem(&BigInt::from(total));
    debug_assert!(r.is_zero());
    Ok(q.to_u64().expect("c(κ) is a small nonnegative integer"))
}
