use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::trees::{OrderedTree, TreeTable, MAX_TREE_ORDER};
use crate::error::{Error, Result};
use crate::integrators::CfScheme;

/// Largest order cap accepted by [`cf_scheme_bseries`].
pub const MAX_SCHEME_SERIES_ORDER: usize = 6;

pub(crate) fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Coefficients `a(t)` of `B(a, x) = Σ h^{|t|−1} a(t) F_x(t)` for every
/// ordered tree with `|t| ≤ N + 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct BSeriesMap {
    cap: usize,
    coeffs: Vec<BigRational>,
}

impl std::fmt::Debug for BSeriesMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.iter().map(|(t, c)| (t.to_string(), c.to_string()))).finish()
    }
}

impl BSeriesMap {
    pub fn zeros(cap: usize) -> Result<Self> {
        if cap > MAX_TREE_ORDER {
            return Err(Error::domain(format!("B-series cap {cap} exceeds {MAX_TREE_ORDER}")));
        }
        let n = TreeTable::get().upto[cap + 1];
        Ok(Self { cap, coeffs: vec![BigRational::zero(); n] })
    }

    pub fn from_fn(cap: usize, f: impl Fn(&OrderedTree) -> BigRational) -> Result<Self> {
        let mut out = Self::zeros(cap)?;
        let table = TreeTable::get();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c = f(&table.trees[i]);
        }
        Ok(out)
    }

    /// The identity map: 1 on the single node, 0 elsewhere.
    pub fn identity(cap: usize) -> Result<Self> {
        let mut out = Self::zeros(cap)?;
        out.coeffs[0] = BigRational::one();
        Ok(out)
    }

    /// The exact `h`-flow, `α(t)/(|t|−1)!`.
    pub fn exact_flow(cap: usize) -> Result<Self> {
        Self::from_fn(cap, OrderedTree::exact_flow_coeff)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` when `t` is beyond the cap.
    pub fn get(&self, t: &OrderedTree) -> Option<&BigRational> {
        TreeTable::get().index.get(t).and_then(|&i| self.coeffs.get(i))
    }

    pub fn set(&mut self, t: &OrderedTree, value: BigRational) -> Result<()> {
        let i = TreeTable::get().index.get(t).copied().filter(|&i| i < self.coeffs.len());
        let i = i.ok_or_else(|| Error::domain(format!("tree {t} is beyond cap {}", self.cap)))?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OrderedTree, &BigRational)> {
        TreeTable::get().trees.iter().zip(self.coeffs.iter())
    }

    fn same_cap(&self, other: &Self) -> Result<()> {
        if self.cap != other.cap {
            return Err(Error::domain(format!("B-series caps differ: {} vs {}", self.cap, other.cap)));
        }
        Ok(())
    }

    /// `Σ cᵢ aᵢ`.
    pub fn linear_combination(cap: usize, terms: &[(BigRational, &BSeriesMap)]) -> Result<Self> {
        let mut out = Self::zeros(cap)?;
        for (c, a) in terms {
            out.same_cap(a)?;
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.coeffs.iter_mut().zip(&a.coeffs) {
                *o += c * x;
            }
        }
        Ok(out)
    }
}

/// Series of `φ_a ∘ φ_b`: `ab(t) = Σₖ a(B₊(t_{k+1}…t_μ)) b(B₊(t₁…t_k))`.
///
/// On the single node this gives `a(∘)b(∘)`, which is 1 for two maps.
pub fn compose(a: &BSeriesMap, b: &BSeriesMap) -> Result<BSeriesMap> {
    a.same_cap(b)?;
    let table = TreeTable::get();
    let mut out = BSeriesMap::zeros(a.cap)?;
    for (i, o) in out.coeffs.iter_mut().enumerate() {
        let mu = table.children[i].len();
        let mut acc = BigRational::zero();
        for k in 0..=mu {
            let (x, y) = (&a.coeffs[table.suffix[i][k]], &b.coeffs[table.prefix[i][k]]);
            if !x.is_zero() && !y.is_zero() {
                acc += x * y;
            }
        }
        *o = acc;
    }
    Ok(out)
}

/// Series of the field frozen at the point with series `a`: `a(t)` on
/// `B₊(t)`, zero on the single node and on trees whose root has two or
/// more children.
pub fn frozen_bseries(a: &BSeriesMap) -> Result<BSeriesMap> {
    let table = TreeTable::get();
    let mut out = BSeriesMap::zeros(a.cap)?;
    for i in 0..out.coeffs.len() {
        if let [c] = table.children[i][..] {
            out.coeffs[i] = a.coeffs[c].clone();
        }
    }
    Ok(out)
}

/// Series of the `h`-flow of a vector-field series `G`:
/// `g(B₊(t₁…t_μ)) = G(B₊(t₁))⋯G(B₊(t_μ))/μ!`.
pub fn exp_bseries(g: &BSeriesMap) -> Result<BSeriesMap> {
    let table = TreeTable::get();
    for (i, c) in g.coeffs.iter().enumerate() {
        if table.children[i].len() != 1 && !c.is_zero() {
            return Err(Error::domain(format!(
                "not a vector-field series: nonzero coefficient on {}",
                table.trees[i]
            )));
        }
    }
    let mut out = BSeriesMap::zeros(g.cap)?;
    let mut fact = BigInt::one();
    for i in 0..out.coeffs.len() {
        let ch = &table.children[i];
        let mut prod = BigRational::one();
        for &c in ch {
            let gi = table.grafted[c].expect("B₊ of a subtree stays within the table");
            prod *= &g.coeffs[gi];
            if prod.is_zero() {
                break;
            }
        }
        if !prod.is_zero() {
            fact.clone_from(&BigInt::one());
            for m in 2..=ch.len() {
                fact *= m;
            }
            prod /= BigRational::from_integer(fact.clone());
        }
        out.coeffs[i] = prod;
    }
    Ok(out)
}

/// Series of the numerical solution `Y_{s+1}` of a commutator-free scheme,
/// built stage by stage: each exponential composes the flow of the frozen
/// combination `Σₖ αᵏ Y_k` onto the running stage value.
pub fn cf_scheme_bseries(scheme: &CfScheme, cap: usize) -> Result<BSeriesMap> {
    if cap > MAX_SCHEME_SERIES_ORDER {
        return Err(Error::domain(format!("scheme series are capped at order {MAX_SCHEME_SERIES_ORDER}, got {cap}")));
    }
    let s = scheme.stage_count();
    let mut stage_values: Vec<BSeriesMap> = Vec::with_capacity(s);
    for r in 0..=s {
        let stage = if r < s { &scheme.stages()[r] } else { scheme.update() };
        let mut y = BSeriesMap::identity(cap)?;
        for group in &stage.exponentials {
            let mut terms = Vec::new();
            for (k, a) in group.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                if k >= stage_values.len() {
                    return Err(Error::scheme(format!("stage {} refers to F{} before it is available", r + 1, k + 1)));
                }
                terms.push((big(*a), &stage_values[k]));
            }
            let combo = BSeriesMap::linear_combination(cap, &terms)?;
            y = compose(&exp_bseries(&frozen_bseries(&combo)?)?, &y)?;
        }
        if r == s {
            return Ok(y);
        }
        stage_values.push(y);
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> OrderedTree {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn identity_is_neutral() {
        let e = BSeriesMap::exact_flow(5).unwrap();
        let id = BSeriesMap::identity(5).unwrap();
        assert_eq!(compose(&e, &id).unwrap(), e);
        assert_eq!(compose(&id, &e).unwrap(), e);
    }

    #[test]
    fn exact_flow_composed_with_itself_at_grade_one() {
        // The concatenation product composes operators frozen at x, so only
        // the grade-one term has to match the 2h-flow.
        let e = BSeriesMap::exact_flow(5).unwrap();
        let ee = compose(&e, &e).unwrap();
        assert_eq!(ee.get(&t("aabb")).unwrap(), &q(2, 1));
        assert_eq!(ee.get(&t("ab")).unwrap(), &q(1, 1));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = BSeriesMap::zeros(4).unwrap();
        assert_eq!(exp_bseries(&z).unwrap(), BSeriesMap::identity(4).unwrap());
        let mut bad = z.clone();
        bad.set(&t("aababb"), q(1, 1)).unwrap();
        assert!(exp_bseries(&bad).is_err());
        bad.set(&t("ab"), q(1, 1)).unwrap();
        assert!(exp_bseries(&bad).is_err());
    }

    #[test]
    fn frozen_point_series_and_its_flow() {
        let point = BSeriesMap::identity(4).unwrap();
        let f = frozen_bseries(&point).unwrap();
        for (tree, c) in f.iter() {
            let want = if tree == &t("aabb") { q(1, 1) } else { q(0, 1) };
            assert_eq!(c, &want, "{tree}");
        }
        let g = exp_bseries(&f).unwrap();
        assert_eq!(g.get(&t("aababb")).unwrap(), &q(1, 2));
        assert_eq!(g.get(&t("aabababb")).unwrap(), &q(1, 6));
        assert_eq!(g.get(&t("aaabbb")).unwrap(), &q(0, 1));
    }

    #[test]
    fn caps_must_agree() {
        let a = BSeriesMap::identity(3).unwrap();
        let b = BSeriesMap::identity(4).unwrap();
        assert!(compose(&a, &b).is_err());
        assert!(BSeriesMap::zeros(9).is_err());
        assert!(a.get(&t("aaaaabbbbb")).is_none());
        assert!(cf_scheme_bseries(&CfScheme::cf4(), 7).is_err());
    }

    #[test]
    fn lie_euler_series() {
        let y = cf_scheme_bseries(&CfScheme::lie_euler(), 5).unwrap();
        let mut fact = 1;
        for (tree, c) in y.iter() {
            let bushy = tree.height() <= 1;
            if bushy {
                fact = (1..=tree.children().len() as i64).product();
                assert_eq!(c, &q(1, fact), "{tree}");
            } else {
                assert!(c.is_zero(), "{tree}");
            }
        }
        assert!(fact > 1);
    }
}
