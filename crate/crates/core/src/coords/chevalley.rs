//! Canonical coordinates of the second kind on sl(n) in an ordered
//! Chevalley basis.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie_core::{expm, AlgebraDescriptor, AlgebraElement, GroupElement};

/// One basis element: a root vector `E_ab` or a Cartan element
/// `E_kk − E_{k+1,k+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChevalleyElement {
    Root { row: usize, col: usize },
    Cartan { index: usize },
}

/// A violated instance of the root condition: `kβ_i + β_s = β_m` with
/// `m < i < s` while `β_m + β_n ∈ Φ ∪ {0}` for some `m < n < i`.
/// Indices are 1-based positions in the ordered basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AobWitness {
    pub m: usize,
    pub i: usize,
    pub s: usize,
    pub k: usize,
    pub n: usize,
}

impl fmt::Display for AobWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}·β{} + β{} = β{} but β{} + β{} is a root or zero",
            self.k, self.i, self.s, self.m, self.m, self.n
        )
    }
}

/// Result of the exhaustive root-condition check.
#[derive(Clone, Debug)]
pub struct AobCertificate {
    pub is_aob: bool,
    pub witness: Option<AobWitness>,
    /// Number of `(m, i, s, k)` combinations examined.
    pub combinations_checked: usize,
}

/// An ordered Chevalley basis of sl(n): all root vectors first (in a chosen
/// order), then the Cartan elements.
#[derive(Clone, Debug)]
pub struct ChevalleyBasis {
    n: usize,
    elements: Vec<ChevalleyElement>,
    roots: Vec<Vec<i32>>,
    ad: Vec<DMatrix<f64>>,
    nilpotency: Vec<usize>,
    certificate: AobCertificate,
}

impl ChevalleyBasis {
    /// The standard ordering: positive roots `e_i e_{j+1}ᵀ` sorted by `i`
    /// then `j`, the negative roots in the same order, then the Cartan
    /// elements.
    pub fn sl(n: usize) -> Result<Self> {
        let m = n * (n - 1) / 2;
        Self::sl_with_root_order(n, &(0..2 * m).collect::<Vec<_>>())
    }

    /// The root vectors of [`ChevalleyBasis::sl`] rearranged: position `p`
    /// of the new basis holds root vector `order[p]` of the standard one.
    pub fn sl_with_root_order(n: usize, order: &[usize]) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("sl(n) needs n >= 2"));
        }
        let mut positive = Vec::new();
        for i in 0..n - 1 {
            for j in i..n - 1 {
                positive.push((i, j + 1));
            }
        }
        let mut standard: Vec<ChevalleyElement> =
            positive.iter().map(|&(r, c)| ChevalleyElement::Root { row: r, col: c }).collect();
        standard.extend(positive.iter().map(|&(r, c)| ChevalleyElement::Root { row: c, col: r }));
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..standard.len()).collect::<Vec<_>>() {
            return Err(Error::domain(format!("root order must be a permutation of 0..{}", standard.len())));
        }
        let mut elements: Vec<ChevalleyElement> = order.iter().map(|&k| standard[k].clone()).collect();
        elements.extend((0..n - 1).map(|index| ChevalleyElement::Cartan { index }));
        Self::build(n, elements)
    }

    fn build(n: usize, elements: Vec<ChevalleyElement>) -> Result<Self> {
        let roots: Vec<Vec<i32>> = elements
            .iter()
            .filter_map(|e| match e {
                ChevalleyElement::Root { row, col } => {
                    let mut b = vec![0; n];
                    b[*row] += 1;
                    b[*col] -= 1;
                    Some(b)
                }
                ChevalleyElement::Cartan { .. } => None,
            })
            .collect();
        let mut basis = Self {
            n,
            elements,
            roots,
            ad: Vec::new(),
            nilpotency: Vec::new(),
            certificate: AobCertificate { is_aob: false, witness: None, combinations_checked: 0 },
        };
        let mats: Vec<DMatrix<f64>> = (0..basis.dim()).map(|k| basis.element_matrix(k)).collect();
        for a in &mats {
            let mut ad = DMatrix::zeros(basis.dim(), basis.dim());
            for (j, b) in mats.iter().enumerate() {
                ad.set_column(j, &basis.coords_of_matrix(&(a * b - b * a)));
            }
            basis.ad.push(ad);
        }
        // Smallest K with ad^{K+1} = 0, iterating at most 2n times.
        basis.nilpotency = basis
            .ad
            .iter()
            .map(|ad| {
                let mut p = ad.clone();
                for k in 1..=2 * n {
                    if p.amax() == 0.0 {
                        return k - 1;
                    }
                    p = &p * ad;
                }
                2 * n
            })
            .collect();
        basis.certificate = is_aob_roots(&basis.roots, n);
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension `n² − 1`.
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Number of root vectors `d*`.
    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn elements(&self) -> &[ChevalleyElement] {
        &self.elements
    }

    /// Root of the `k`-th basis element (0-based), in ε-coordinates.
    pub fn root(&self, k: usize) -> Option<&[i32]> {
        self.roots.get(k).map(|r| r.as_slice())
    }

    /// `K` with `ad_{e_k}^{K+1} = 0`.
    pub fn nilpotency(&self, k: usize) -> usize {
        self.nilpotency[k]
    }

    pub fn certificate(&self) -> &AobCertificate {
        &self.certificate
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        AlgebraDescriptor::sl(self.n).expect("n >= 2")
    }

    pub fn element_matrix(&self, k: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        match self.elements[k] {
            ChevalleyElement::Root { row, col } => m[(row, col)] = 1.0,
            ChevalleyElement::Cartan { index } => {
                m[(index, index)] = 1.0;
                m[(index + 1, index + 1)] = -1.0;
            }
        }
        m
    }

    fn coords_of_matrix(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        for (k, e) in self.elements.iter().enumerate() {
            c[k] = match *e {
                ChevalleyElement::Root { row, col } => x[(row, col)],
                ChevalleyElement::Cartan { index } => (0..=index).map(|i| x[(i, i)]).sum(),
            };
        }
        c
    }

    /// Coordinates of an sl(n) element in this basis.
    pub fn coords(&self, u: &AlgebraElement) -> Result<DVector<f64>> {
        self.descriptor().check_same(u.descriptor())?;
        Ok(self.coords_of_matrix(u.matrix()))
    }

    pub fn element(&self, c: &DVector<f64>) -> Result<AlgebraElement> {
        if c.len() != self.dim() {
            return Err(Error::domain("coordinate vector has the wrong length"));
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, ck) in c.iter().enumerate() {
            m += self.element_matrix(k) * *ck;
        }
        AlgebraElement::new(self.descriptor(), m)
    }

    /// `Ad_{exp(c e_k)}` in basis coordinates, from the terminating series.
    fn ad_exp(&self, k: usize, c: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut acc = DMatrix::identity(d, d);
        let mut term = DMatrix::identity(d, d);
        for j in 1..=self.nilpotency[k] {
            term = &term * &self.ad[k] * (c / j as f64);
            acc += &term;
        }
        acc
    }

    /// `ψ(u) = exp(u₁e₁)···exp(u_d e_d)` with closed-form factors.
    pub fn psi(&self, u: &AlgebraElement) -> Result<GroupElement> {
        let c = self.coords(u)?;
        let n = self.n;
        let mut g = DMatrix::<f64>::identity(n, n);
        for (k, e) in self.elements.iter().enumerate() {
            let ck = c[k];
            if ck == 0.0 {
                continue;
            }
            match *e {
                // g·(I + c E_ab) adds c·(column a of g) to column b.
                ChevalleyElement::Root { row, col } => {
                    let add = g.column(row) * ck;
                    let mut target = g.column_mut(col);
                    target += add;
                }
                ChevalleyElement::Cartan { index } => {
                    let a = ck.exp();
                    let mut c0 = g.column_mut(index);
                    c0 *= a;
                    let mut c1 = g.column_mut(index + 1);
                    c1 /= a;
                }
            }
        }
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::numeric("psi overflowed"));
        }
        Ok(GroupElement::from_raw(self.descriptor(), g))
    }

    /// `dψ_u(v) = v₁e₁ + Σ_{i≥2} vᵢ Ad_{exp(u₁e₁)}∘···∘Ad_{exp(u_{i−1}e_{i−1})}(eᵢ)`,
    /// evaluated term by term in any ordering.
    pub fn dpsi_direct(&self, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        let cu = self.coords(u)?;
        let cv = self.coords(v)?;
        let d = self.dim();
        let mut prefix = DMatrix::<f64>::identity(d, d);
        let mut out = DVector::zeros(d);
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            out += &prefix * e * cv[i];
            let factor = if i < self.root_count() {
                self.ad_exp(i, cu[i])
            } else {
                expm(&(&self.ad[i] * cu[i]))?
            };
            prefix = &prefix * factor;
        }
        self.element(&out)
    }

    /// `Âd_1∘···∘Âd_{d*}` applied to coordinates, without the AOB check.
    pub(crate) fn dpsi_factored_coords(&self, cu: &DVector<f64>, cv: &DVector<f64>) -> DVector<f64> {
        let mut w = cv.clone();
        for q in (0..self.root_count()).rev() {
            let ad = self.ad_exp(q, cu[q]);
            let bottom = w.rows(q + 1, self.dim() - q - 1).into_owned();
            let mut top = w.clone();
            top.rows_mut(q + 1, self.dim() - q - 1).fill(0.0);
            w = top + ad.columns(q + 1, self.dim() - q - 1) * bottom;
        }
        w
    }

    fn require_aob(&self) -> Result<()> {
        if self.certificate.is_aob {
            return Ok(());
        }
        Err(Error::domain(format!(
            "basis ordering is not admissible: {}",
            self.certificate.witness.as_ref().map(|w| w.to_string()).unwrap_or_default()
        )))
    }

    /// The factored differential `dψ_u`; requires an admissible ordering.
    pub fn dpsi(&self, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        self.require_aob()?;
        let w = self.dpsi_factored_coords(&self.coords(u)?, &self.coords(v)?);
        self.element(&w)
    }

    /// `dψ_u⁻¹ = Âd⁻¹_{d*}∘···∘Âd⁻¹_1`; Cartan factors are the identity.
    pub fn dpsi_inv(&self, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        self.require_aob()?;
        let cu = self.coords(u)?;
        let mut w = self.coords(v)?;
        let d = self.dim();
        for q in 0..self.root_count() {
            // Âd = [[I, X], [0, Y]] in the split (≤ q, > q).
            let ad = self.ad_exp(q, cu[q]);
            let nb = d - q - 1;
            let y = ad.view((q + 1, q + 1), (nb, nb)).into_owned();
            let x = ad.view((0, q + 1), (q + 1, nb)).into_owned();
            let zb = y
                .lu()
                .solve(&w.rows(q + 1, nb).into_owned())
                .ok_or_else(|| Error::numeric("singular factor in dψ⁻¹"))?;
            let zt = w.rows(0, q + 1).into_owned() - x * &zb;
            w.rows_mut(0, q + 1).copy_from(&zt);
            w.rows_mut(q + 1, nb).copy_from(&zb);
        }
        self.element(&w)
    }
}

fn is_aob_roots(roots: &[Vec<i32>], n: usize) -> AobCertificate {
    let d = roots.len();
    let mut closure: HashSet<Vec<i32>> = roots.iter().cloned().collect();
    closure.insert(vec![0; n]);
    let mut checked = 0;
    for m in 0..d {
        for i in m + 1..d {
            for s in i + 1..d {
                for k in 1..=n as i32 {
                    checked += 1;
                    let hit = (0..n).all(|t| k * roots[i][t] + roots[s][t] == roots[m][t]);
                    if !hit {
                        continue;
                    }
                    for nn in m + 1..i {
                        let sum: Vec<i32> = (0..n).map(|t| roots[m][t] + roots[nn][t]).collect();
                        if closure.contains(&sum) {
                            return AobCertificate {
                                is_aob: false,
                                witness: Some(AobWitness { m: m + 1, i: i + 1, s: s + 1, k: k as usize, n: nn + 1 }),
                                combinations_checked: checked,
                            };
                        }
                    }
                }
            }
        }
    }
    AobCertificate { is_aob: true, witness: None, combinations_checked: checked }
}

/// Exhaustive check of the sufficient root condition for an admissible
/// ordered basis. The root-vector ordering is taken from `basis`.
pub fn is_aob(basis: &ChevalleyBasis) -> AobCertificate {
    basis.certificate.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{dexpinv, group_exp, group_log};
    use proptest::prelude::*;

    fn sl3(c: &[f64]) -> AlgebraElement {
        AlgebraElement::projected(AlgebraDescriptor::sl(3).unwrap(), &DMatrix::from_row_slice(3, 3, c)).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn counts_and_standard_order() {
        for l in 1..=4 {
            let b = ChevalleyBasis::sl(l + 1).unwrap();
            assert_eq!(b.dim(), l * l + 2 * l);
            assert_eq!(b.root_count(), l * (l + 1));
        }
        let b = ChevalleyBasis::sl(3).unwrap();
        let want = [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)];
        for (e, (r, c)) in b.elements().iter().zip(want) {
            assert_eq!(*e, ChevalleyElement::Root { row: r, col: c });
        }
        assert_eq!(b.root(0), Some(&[1, -1, 0][..]));
        assert!((0..b.root_count()).all(|k| b.nilpotency(k) == 2));
    }

    #[test]
    fn coords_round_trip() {
        let b = ChevalleyBasis::sl(4).unwrap();
        let c = DVector::from_fn(b.dim(), |i, _| (i as f64 * 1.3).sin());
        let u = b.element(&c).unwrap();
        assert!((b.coords(&u).unwrap() - c).amax() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let b = ChevalleyBasis::sl(3).unwrap();
        let z = AlgebraElement::zero(b.descriptor());
        assert_eq!(b.psi(&z).unwrap().matrix(), &DMatrix::identity(3, 3));
        let b2 = ChevalleyBasis::sl(2).unwrap();
        for k in 0..3 {
            let mut c = DVector::zeros(3);
            c[k] = 0.7;
            let u = b2.element(&c).unwrap();
            assert!((b2.psi(&u).unwrap().matrix() - group_exp(&u).unwrap().matrix()).amax() < 1e-14);
        }
        let u = sl3(&[0.1, -0.05, 0.08, 0.02, 0.03, -0.1, 0.07, 0.04, -0.02]);
        assert!((b.psi(&u).unwrap().matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_orderings_are_admissible() {
        for n in 2..=4 {
            let cert = is_aob(&ChevalleyBasis::sl(n).unwrap());
            assert!(cert.is_aob, "sl({n}): {:?}", cert.witness);
        }
        // sl(2): no triple exists at all.
        assert_eq!(is_aob(&ChevalleyBasis::sl(2).unwrap()).combinations_checked, 0);
    }

    #[test]
    fn scrambled_ordering_has_witness() {
        // Interleave positive and negative roots.
        let b = ChevalleyBasis::sl_with_root_order(3, &[0, 3, 1, 4, 2, 5]).unwrap();
        let cert = is_aob(&b);
        assert!(!cert.is_aob);
        let w = cert.witness.unwrap();
        let r = |k: usize| b.root(k - 1).unwrap().to_vec();
        let lhs: Vec<i32> = (0..3).map(|t| w.k as i32 * r(w.i)[t] + r(w.s)[t]).collect();
        assert_eq!(lhs, r(w.m));
        assert!(matches!(b.dpsi_inv(&sl3(&[0.0; 9]), &sl3(&[0.0; 9])), Err(Error::Domain(_))));
    }

    #[test]
    fn factored_form_matches_direct_for_admissible_orderings() {
        let u = sl3(&[0.2, -0.7, 0.4, 0.9, -0.1, 0.3, -0.5, 0.6, -0.1]);
        let v = sl3(&[0.3, 0.1, -0.8, 0.2, 0.5, 0.7, -0.4, 0.9, -0.8]);
        let mut admissible = 0;
        let mut rejected = 0;
        for order in permutations(6) {
            let b = ChevalleyBasis::sl_with_root_order(3, &order).unwrap();
            if !b.certificate().is_aob {
                rejected += 1;
                continue;
            }
            admissible += 1;
            let direct = b.dpsi_direct(&u, &v).unwrap();
            let factored = b.dpsi(&u, &v).unwrap();
            assert!((direct.matrix() - factored.matrix()).amax() < 1e-12, "{order:?}");
        }
        assert!(admissible > 0 && rejected > 0, "{admissible} {rejected}");
    }

    #[test]
    fn direct_formula_matches_finite_differences() {
        let b = ChevalleyBasis::sl(3).unwrap();
        let u = sl3(&[0.2, -0.7, 0.4, 0.9, -0.1, 0.3, -0.5, 0.6, -0.1]);
        let v = sl3(&[0.3, 0.1, -0.8, 0.2, 0.5, 0.7, -0.4, 0.9, -0.8]);
        let s = 1e-5;
        let inv = b.psi(&u).unwrap().inverse().unwrap();
        let plus = b.psi(&u.axpy(s, &v)).unwrap().matrix() * inv.matrix();
        let minus = b.psi(&u.axpy(-s, &v)).unwrap().matrix() * inv.matrix();
        let fd = (plus - minus) / (2.0 * s);
        assert!((fd - b.dpsi_direct(&u, &v).unwrap().matrix()).amax() < 1e-8);
    }

    #[test]
    fn dpsi_inv_examples() {
        let b = ChevalleyBasis::sl(3).unwrap();
        let v = sl3(&[0.3, 0.1, -0.8, 0.2, 0.5, 0.7, -0.4, 0.9, -0.8]);
        let z = AlgebraElement::zero(b.descriptor());
        assert!((b.dpsi_inv(&z, &v).unwrap().matrix() - v.matrix()).amax() < 1e-15);
        // Agreement with the exponential chart to first order.
        let u0 = sl3(&[0.2, -0.7, 0.4, 0.9, -0.1, 0.3, -0.5, 0.6, -0.1]);
        let diff = |eps: f64| {
            let u = u0.scale(eps);
            let a = b.dpsi_inv(&u, &v).unwrap();
            let l = group_log(&b.psi(&u).unwrap()).unwrap();
            let e = dexpinv(&l, &v, 3).unwrap();
            (a.matrix() - e.matrix()).amax()
        };
        let ratio = diff(1e-3) / diff(5e-4);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    proptest! {
        #[test]
        fn dpsi_round_trip(cu in prop::collection::vec(-1.0..1.0f64, 8), cv in prop::collection::vec(-1.0..1.0f64, 8)) {
            for n in [2usize, 3, 4] {
                let b = ChevalleyBasis::sl(n).unwrap();
                let d = b.dim();
                let u = b.element(&DVector::from_fn(d, |i, _| cu[i % 8]))?;
                let u = u.scale(1.0 / u.matrix().norm().max(1.0));
                let v = b.element(&DVector::from_fn(d, |i, _| cv[(i + 3) % 8]))?;
                let back = b.dpsi(&u, &b.dpsi_inv(&u, &v)?)?;
                prop_assert!((back.matrix() - v.matrix()).amax() <= 1e-12);
            }
        }
    }
}
