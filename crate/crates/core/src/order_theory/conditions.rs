use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::bseries::{cf_scheme_bseries, BSeriesMap};
use super::trees::{trees_up_to, OrderedTree};
use crate::error::{Error, Result};
use crate::integrators::{CfScheme, CfStage};

/// Largest order accepted by [`check_order`].
pub const MAX_CHECK_ORDER: usize = 5;

/// One order condition `Y(t) = α(t)/(|t|−1)!`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderConditionRow {
    pub tree: OrderedTree,
    pub scheme: BigRational,
    pub exact: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderReport {
    pub scheme: String,
    pub order: usize,
    /// One row per tree with `2 ≤ |t| ≤ order + 1`.
    pub rows: Vec<OrderConditionRow>,
}

impl OrderReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// First failing condition, if any.
    pub fn witness(&self) -> Option<&OrderConditionRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OrderConditionRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

impl fmt::Display for OrderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = 2 * (self.order + 1);
        writeln!(f, "scheme {} order {}", self.scheme, self.order)?;
        writeln!(f, "{:<width$}  {:>12}  {:>12}  status", "tree", "scheme", "exact")?;
        for r in &self.rows {
            let status = if r.pass { "ok" } else { "FAIL" };
            writeln!(f, "{:<width$}  {:>12}  {:>12}  {status}", r.tree.to_string(), r.scheme.to_string(), r.exact.to_string())?;
        }
        let failed = self.failures().count();
        if failed == 0 {
            write!(f, "PASS: {} conditions satisfied", self.rows.len())
        } else {
            write!(f, "FAIL: {failed} of {} conditions violated", self.rows.len())
        }
    }
}

/// Compares the scheme's B-series with the exact flow on every tree up to
/// `order + 1` nodes, in exact arithmetic.
pub fn check_order(scheme: &CfScheme, order: usize) -> Result<OrderReport> {
    if order == 0 || order > MAX_CHECK_ORDER {
        return Err(Error::domain(format!("order must be in 1..={MAX_CHECK_ORDER}, got {order}")));
    }
    let y = cf_scheme_bseries(scheme, order)?;
    let rows = y
        .iter()
        .filter(|(t, _)| t.size() >= 2)
        .map(|(t, c)| {
            let exact = t.exact_flow_coeff();
            OrderConditionRow { tree: t.clone(), pass: c == &exact, scheme: c.clone(), exact }
        })
        .collect();
    Ok(OrderReport { scheme: scheme.name().to_string(), order, rows })
}

/// Rank of a rational matrix given by rows.
pub fn rational_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &pivot;
                for j in c..cols {
                    let d = &f * &m[rank][j];
                    m[r][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Weights `wᵢ` with `p'(0) = Σ wᵢ p(xᵢ)` for every polynomial of degree
/// below the number of nodes.
fn derivative_weights(nodes: &[i64]) -> Vec<BigRational> {
    let x: Vec<BigRational> = nodes.iter().map(|&v| BigRational::from_integer(v.into())).collect();
    (0..x.len())
        .map(|i| {
            let mut w = BigRational::zero();
            for j in 0..x.len() {
                if j == i {
                    continue;
                }
                let mut term = BigRational::one() / (&x[i] - &x[j]);
                for k in 0..x.len() {
                    if k != i && k != j {
                        term *= -&x[k] / (&x[i] - &x[k]);
                    }
                }
                w += term;
            }
            w
        })
        .collect()
}

/// Addresses one coefficient `α_{r,j}^k` of a scheme; `stage == s` is the update.
#[derive(Clone, Copy, Debug)]
struct Slot {
    stage: usize,
    group: usize,
    k: usize,
}

fn slots(scheme: &CfScheme) -> Vec<Slot> {
    let s = scheme.stage_count();
    let mut out = Vec::new();
    for r in 0..=s {
        let st = if r < s { &scheme.stages()[r] } else { scheme.update() };
        for group in 0..st.exponentials.len() {
            for k in 0..r.min(s) {
                out.push(Slot { stage: r, group, k });
            }
        }
    }
    out
}

fn perturbed(scheme: &CfScheme, slot: Slot, delta: i64) -> CfScheme {
    let s = scheme.stage_count();
    let strip = |st: &CfStage| CfStage::new(st.exponentials.clone());
    let mut stages: Vec<CfStage> = scheme.stages().iter().map(strip).collect();
    let mut update = strip(scheme.update());
    let st = if slot.stage < s { &mut stages[slot.stage] } else { &mut update };
    st.exponentials[slot.group][slot.k] += Rational64::from_integer(delta);
    CfScheme::from_parts_unchecked(scheme.name().to_string(), stages, update)
}

/// Jacobian of `Y(t)` with respect to every coefficient slot
/// `α_{r,j}^k` (`k < r`) of the scheme, one row per tree.
///
/// Each entry is exact: `Y(t)` is a polynomial of degree at most
/// `|t| − 1` in any one coefficient, differentiated by exact interpolation.
pub fn condition_jacobian(scheme: &CfScheme, trees: &[OrderedTree]) -> Result<Vec<Vec<BigRational>>> {
    let cap = trees.iter().map(OrderedTree::grade).max().unwrap_or(0);
    let half = cap.div_ceil(2).max(1) as i64;
    let nodes: Vec<i64> = (-half..=half).collect();
    let w = derivative_weights(&nodes);
    let slots = slots(scheme);
    let mut rows = vec![Vec::with_capacity(slots.len()); trees.len()];
    for &slot in &slots {
        let series: Vec<BSeriesMap> = nodes
            .iter()
            .map(|&d| cf_scheme_bseries(&perturbed(scheme, slot, d), cap))
            .collect::<Result<_>>()?;
        for (row, t) in rows.iter_mut().zip(trees) {
            let mut acc = BigRational::zero();
            for (wi, y) in w.iter().zip(&series) {
                acc += wi * y.get(t).expect("within cap");
            }
            row.push(acc);
        }
    }
    Ok(rows)
}

/// Number of the conditions on `trees` (all of one size) that are
/// independent of the conditions of lower order, measured as the rank gain
/// of the condition Jacobian at `scheme`.
pub fn independent_conditions(scheme: &CfScheme, trees: &[OrderedTree]) -> Result<usize> {
    let Some(size) = trees.first().map(OrderedTree::size) else { return Ok(0) };
    if trees.iter().any(|t| t.size() != size) {
        return Err(Error::domain("trees must share a node count"));
    }
    if size < 2 {
        return Err(Error::domain("the single node carries no condition"));
    }
    let lower: Vec<OrderedTree> = trees_up_to(size - 2)?.into_iter().flatten().filter(|t| t.size() >= 2).collect();
    let mut all = lower.clone();
    all.extend_from_slice(trees);
    // One series evaluation per slot serves both row sets.
    let rows = condition_jacobian(scheme, &all)?;
    let base = rational_rank(&rows[..lower.len()]);
    Ok(rational_rank(&rows) - base)
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n as u64).map(BigInt::from).product()
}
