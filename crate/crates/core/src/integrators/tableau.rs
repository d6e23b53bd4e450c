use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub(crate) fn r2f(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub(crate) fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Coefficients `(A, b)` of a Runge–Kutta method, stored exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    name: String,
    a: Vec<Vec<Rational64>>,
    b: Vec<Rational64>,
    order: Option<usize>,
}

impl ButcherTableau {
    /// Checks shapes and `Σ bᵣ = 1`.
    pub fn new(name: &str, a: Vec<Vec<Rational64>>, b: Vec<Rational64>, order: Option<usize>) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::scheme("tableau needs at least one stage"));
        }
        if a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::scheme(format!("A must be {s}x{s}")));
        }
        let sum: Rational64 = b.iter().sum();
        if !sum.is_one() {
            return Err(Error::scheme(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { name: name.to_string(), a, b, order })
    }

    pub fn euler() -> Self {
        Self::new("euler", vec![vec![Rational64::zero()]], vec![Rational64::one()], Some(1)).expect("valid")
    }

    pub fn midpoint() -> Self {
        let z = Rational64::zero();
        Self::new("midpoint", vec![vec![z, z], vec![rat(1, 2), z]], vec![z, Rational64::one()], Some(2)).expect("valid")
    }

    pub fn kutta3() -> Self {
        let z = Rational64::zero();
        Self::new(
            "kutta3",
            vec![vec![z, z, z], vec![rat(1, 2), z, z], vec![rat(-1, 1), rat(2, 1), z]],
            vec![rat(1, 6), rat(2, 3), rat(1, 6)],
            Some(3),
        )
        .expect("valid")
    }

    /// The classical fourth-order method.
    pub fn rk4() -> Self {
        let z = Rational64::zero();
        Self::new(
            "rk4",
            vec![
                vec![z, z, z, z],
                vec![rat(1, 2), z, z, z],
                vec![z, rat(1, 2), z, z],
                vec![z, z, rat(1, 1), z],
            ],
            vec![rat(1, 6), rat(1, 3), rat(1, 3), rat(1, 6)],
            Some(4),
        )
        .expect("valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    /// True when `A` is strictly lower triangular.
    pub fn is_explicit(&self) -> bool {
        self.a.iter().enumerate().all(|(r, row)| row[r..].iter().all(|x| x.is_zero()))
    }

    pub fn a(&self, r: usize, j: usize) -> Rational64 {
        self.a[r][j]
    }

    pub fn b(&self, r: usize) -> Rational64 {
        self.b[r]
    }

    pub fn a_f64(&self, r: usize, j: usize) -> f64 {
        r2f(self.a[r][j])
    }

    pub fn b_f64(&self, r: usize) -> f64 {
        r2f(self.b[r])
    }

    /// Abscissae `cᵣ = Σⱼ a_{rj}`.
    pub fn c(&self, r: usize) -> Rational64 {
        self.a[r].iter().sum()
    }
}
