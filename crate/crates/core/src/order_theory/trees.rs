use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Largest grade (`|t| − 1`) that [`trees_up_to`] will enumerate.
pub const MAX_TREE_ORDER: usize = 8;

/// An ordered rooted tree `B₊(t₁ … t_μ)`.
///
/// Trees compare by node count first and then lexicographically on the
/// ordered list of subtrees, which fixes the enumeration order. Displayed
/// in the `a`/`b` (down/up) encoding: the single node is `ab`, `B₊(∘)` is
/// `aabb`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedTree {
    size: usize,
    children: Vec<OrderedTree>,
}

impl OrderedTree {
    /// The single node `∘`.
    pub fn node() -> Self {
        Self { size: 1, children: Vec::new() }
    }

    /// `B₊` of an ordered forest.
    pub fn graft(children: Vec<OrderedTree>) -> Self {
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        Self { size, children }
    }

    /// `B₋`: the ordered forest of root subtrees.
    pub fn children(&self) -> &[OrderedTree] {
        &self.children
    }

    pub fn into_children(self) -> Vec<OrderedTree> {
        self.children
    }

    /// Node count `|t|`, root included.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Grade `|t| − 1`, the power of `h` the tree carries.
    pub fn grade(&self) -> usize {
        self.size - 1
    }

    pub fn is_node(&self) -> bool {
        self.children.is_empty()
    }

    /// Longest root-to-leaf path, in edges.
    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// `u·v = B₊(u₁…u_μ v₁…v_ν)`.
    pub fn concat(&self, other: &OrderedTree) -> OrderedTree {
        let mut children = self.children.clone();
        children.extend(other.children.iter().cloned());
        OrderedTree::graft(children)
    }

    /// Number of monotone labellings of the tree, i.e. the size of its
    /// class of labelled ordered trees.
    ///
    /// Panics if the value exceeds `u64`, which needs more than 21 nodes.
    pub fn alpha(&self) -> u64 {
        let mut acc: u64 = 1;
        let mut running = 0;
        for c in &self.children {
            running += c.size;
            let f = binomial(running as u64 - 1, c.size as u64 - 1)
                .checked_mul(c.alpha())
                .expect("alpha overflows u64");
            acc = acc.checked_mul(f).expect("alpha overflows u64");
        }
        acc
    }

    /// Coefficient `α(t)/(|t|−1)!` of the exact flow.
    pub fn exact_flow_coeff(&self) -> BigRational {
        let fact: BigInt = (1..self.size as u64).map(BigInt::from).product();
        BigRational::new(BigInt::from(self.alpha()), fact)
    }

    fn write_code(&self, out: &mut String) {
        out.push('a');
        for c in &self.children {
            c.write_code(out);
        }
        out.push('b');
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

impl fmt::Display for OrderedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(2 * self.size);
        self.write_code(&mut s);
        f.write_str(&s)
    }
}

impl fmt::Debug for OrderedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for OrderedTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.trim().as_bytes();
        let bad = || Error::domain(format!("'{s}' is not an a/b tree encoding"));
        // Stack of partially built child lists.
        let mut stack: Vec<Vec<OrderedTree>> = Vec::new();
        let mut done: Option<OrderedTree> = None;
        for &c in bytes {
            if done.is_some() {
                return Err(bad());
            }
            match c {
                b'a' => stack.push(Vec::new()),
                b'b' => {
                    let t = OrderedTree::graft(stack.pop().ok_or_else(bad)?);
                    match stack.last_mut() {
                        Some(parent) => parent.push(t),
                        None => done = Some(t),
                    }
                }
                _ => return Err(bad()),
            }
        }
        done.ok_or_else(bad)
    }
}

/// Every ordered tree with at most `MAX_TREE_ORDER + 1` nodes, with index
/// tables for the splittings used by B-series recursions.
pub(crate) struct TreeTable {
    pub trees: Vec<OrderedTree>,
    pub index: HashMap<OrderedTree, usize>,
    /// `prefix[i][k]` indexes `B₊(t₁…t_k)`.
    pub prefix: Vec<Vec<usize>>,
    /// `suffix[i][k]` indexes `B₊(t_{k+1}…t_μ)`.
    pub suffix: Vec<Vec<usize>>,
    /// Index of `B₊(tᵢ)` when it is in the table.
    pub grafted: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// `upto[m]` counts the trees with at most `m` nodes.
    pub upto: Vec<usize>,
}

impl TreeTable {
    fn build() -> Self {
        let max_nodes = MAX_TREE_ORDER + 1;
        let mut by_size: Vec<Vec<OrderedTree>> = vec![Vec::new(), vec![OrderedTree::node()]];
        // forests[k]: ordered forests with k nodes in total.
        let mut forests: Vec<Vec<Vec<OrderedTree>>> = vec![vec![Vec::new()]];
        for m in 2..=max_nodes {
            let k = m - 1;
            let mut fk = Vec::new();
            for j in 1..=k {
                for t in &by_size[j] {
                    for rest in &forests[k - j] {
                        let mut f = Vec::with_capacity(rest.len() + 1);
                        f.push(t.clone());
                        f.extend(rest.iter().cloned());
                        fk.push(f);
                    }
                }
            }
            let mut ts: Vec<OrderedTree> = fk.iter().cloned().map(OrderedTree::graft).collect();
            ts.sort();
            forests.push(fk);
            by_size.push(ts);
        }
        let trees: Vec<OrderedTree> = by_size.iter().flatten().cloned().collect();
        let index: HashMap<OrderedTree, usize> = trees.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut upto = vec![0; max_nodes + 1];
        for m in 1..=max_nodes {
            upto[m] = upto[m - 1] + by_size[m].len();
        }
        let look = |t: OrderedTree| index[&t];
        let mut prefix = Vec::with_capacity(trees.len());
        let mut suffix = Vec::with_capacity(trees.len());
        let mut children = Vec::with_capacity(trees.len());
        let mut grafted = Vec::with_capacity(trees.len());
        for t in &trees {
            let c = t.children();
            prefix.push((0..=c.len()).map(|k| look(OrderedTree::graft(c[..k].to_vec()))).collect());
            suffix.push((0..=c.len()).map(|k| look(OrderedTree::graft(c[k..].to_vec()))).collect());
            children.push(c.iter().map(|x| index[x]).collect());
            grafted.push(index.get(&OrderedTree::graft(vec![t.clone()])).copied());
        }
        Self { trees, index, prefix, suffix, grafted, children, upto }
    }

    pub fn get() -> &'static TreeTable {
        static TABLE: OnceLock<TreeTable> = OnceLock::new();
        TABLE.get_or_init(TreeTable::build)
    }
}

/// All ordered trees of grade `0..=n`, grouped by grade and sorted.
/// `result[g]` holds the trees with `g + 1` nodes.
pub fn trees_up_to(n: usize) -> Result<Vec<Vec<OrderedTree>>> {
    if n > MAX_TREE_ORDER {
        return Err(Error::domain(format!("tree enumeration is capped at order {MAX_TREE_ORDER}, got {n}")));
    }
    let table = TreeTable::get();
    Ok((1..=n + 1).map(|m| table.trees[table.upto[m - 1]..table.upto[m]].to_vec()).collect())
}
