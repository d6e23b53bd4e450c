use nalgebra::{DMatrix, Vector3};
use num_rational::Rational64;

use super::algebra::{vee, AlgebraDescriptor, AlgebraElement, CoAlgebraElement, GroupElement};
use super::matfun::{expm, logm, rodrigues};
use crate::error::{Error, Result};

/// Even-index Bernoulli numbers `B₂, B₄, …, B₁₀`.
pub const BERNOULLI_EVEN: [(i64, i64); 5] = [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66)];

/// Largest tabulated truncation index for [`dexpinv`].
pub const DEXPINV_MAX_TRUNCATION: usize = BERNOULLI_EVEN.len();

/// `B_{2k}/(2k)!` as an exact rational, `k = 1..=5`.
pub fn dexpinv_coefficient(k: usize) -> Rational64 {
    let (num, den) = BERNOULLI_EVEN[k - 1];
    let fact: i64 = (1..=(2 * k) as i64).product();
    Rational64::new(num, den * fact)
}

fn r2f(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `[a, b] = ab − ba`.
pub fn bracket(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.descriptor().check_same(b.descriptor())?;
    Ok(AlgebraElement::from_raw(
        a.descriptor().clone(),
        a.matrix() * b.matrix() - b.matrix() * a.matrix(),
    ))
}

/// `ad_u^k(v)`.
pub fn ad_power(u: &AlgebraElement, v: &AlgebraElement, k: usize) -> Result<AlgebraElement> {
    let mut w = v.clone();
    for _ in 0..k {
        w = bracket(u, &w)?;
    }
    Ok(w)
}

/// The group exponential. so(3) uses the Rodrigues formula.
pub fn group_exp(a: &AlgebraElement) -> Result<GroupElement> {
    if !a.is_finite() {
        return Err(Error::numeric("group_exp: non-finite input"));
    }
    let desc = a.descriptor().clone();
    if desc.is_so3() {
        let r = rodrigues(&a.so3_vector());
        return Ok(GroupElement::from_raw(desc, DMatrix::from_column_slice(3, 3, r.as_slice())));
    }
    // For affine elements the block exponential is (exp ξ, φ₁(ξ)c).
    Ok(GroupElement::from_raw(desc, expm(a.matrix())?))
}

/// Principal logarithm. For so(3) the rotation angle must stay below π − 0.1.
pub fn group_log(g: &GroupElement) -> Result<AlgebraElement> {
    let desc = g.descriptor().clone();
    if desc.is_so3() {
        let r = g.matrix();
        let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let theta = c.acos();
        if theta >= std::f64::consts::PI - 0.1 {
            return Err(Error::chart(format!("rotation angle {theta:.4} outside the logarithm's domain")));
        }
        // vee(R − Rᵀ) = 2 sinθ·axis
        let s = vee(&(r - r.transpose()));
        let factor = if theta < 1e-4 {
            0.5 * (1.0 + theta * theta / 6.0 + 7.0 * theta.powi(4) / 360.0)
        } else {
            0.5 * theta / theta.sin()
        };
        return Ok(AlgebraElement::so3(s * factor));
    }
    let l = logm(g.matrix())?;
    AlgebraElement::projected(desc, &l)
}

/// `Ad_g v = g v g⁻¹`.
pub fn adjoint(g: &GroupElement, v: &AlgebraElement) -> Result<AlgebraElement> {
    g.descriptor().check_same(v.descriptor())?;
    let gi = g.inverse()?;
    AlgebraElement::projected(v.descriptor().clone(), &(g.matrix() * v.matrix() * gi.matrix()))
}

/// The dual of [`adjoint`]: `⟨coAd(g, μ), ξ⟩ = ⟨μ, Ad_g ξ⟩`.
pub fn co_adjoint(g: &GroupElement, mu: &CoAlgebraElement) -> Result<CoAlgebraElement> {
    g.descriptor().check_same(mu.descriptor())?;
    let gi = g.inverse()?;
    CoAlgebraElement::projected(mu.descriptor().clone(), &(g.matrix().transpose() * mu.matrix() * gi.matrix().transpose()))
}

/// `⟨ad*_ξ μ, η⟩ = ⟨μ, [ξ, η]⟩`. For so(3) vectors this is `μ × ξ`.
pub fn ad_star(xi: &AlgebraElement, mu: &CoAlgebraElement) -> Result<CoAlgebraElement> {
    xi.descriptor().check_same(mu.descriptor())?;
    let x = xi.matrix();
    let m = mu.matrix();
    CoAlgebraElement::projected(mu.descriptor().clone(), &(x.transpose() * m - m * x.transpose()))
}

/// Truncated `dexp_u(v) = Σ_{k=0}^{terms} ad_uᵏ(v)/(k+1)!`.
pub fn dexp(u: &AlgebraElement, v: &AlgebraElement, terms: usize) -> Result<AlgebraElement> {
    u.descriptor().check_same(v.descriptor())?;
    let mut term = v.clone();
    let mut acc = v.clone();
    let mut fact = 1.0;
    for k in 1..=terms {
        term = bracket(u, &term)?;
        fact *= (k + 1) as f64;
        acc = acc.axpy(1.0 / fact, &term);
    }
    Ok(acc)
}

/// Truncated `dexp⁻¹_u(w) = w − ½[u,w] + Σ_{k=1}^{m} B_{2k}/(2k)! ad_u^{2k}(w)`.
pub fn dexpinv(u: &AlgebraElement, w: &AlgebraElement, m: usize) -> Result<AlgebraElement> {
    u.descriptor().check_same(w.descriptor())?;
    if m > DEXPINV_MAX_TRUNCATION {
        return Err(Error::unsupported(format!(
            "dexpinv truncation {m} exceeds the tabulated range {DEXPINV_MAX_TRUNCATION}"
        )));
    }
    let uw = bracket(u, w)?;
    let mut acc = w.axpy(-0.5, &uw);
    let mut odd = uw;
    for k in 1..=m {
        let even = bracket(u, &odd)?;
        acc = acc.axpy(r2f(dexpinv_coefficient(k)), &even);
        odd = bracket(u, &even)?;
    }
    Ok(acc)
}

/// Smallest truncation `m` with `p ≤ 2m + 1`.
pub fn dexpinv_truncation_for_order(p: usize) -> usize {
    p.saturating_sub(1).div_ceil(2)
}

/// Closed-form `dexp_u(v)` on so(3) vectors.
pub fn dexp_so3(u: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let t2 = u.norm_squared();
    let t = t2.sqrt();
    let (a, b) = if t < 1e-3 {
        (0.5 - t2 / 24.0 + t2 * t2 / 720.0, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0)
    } else {
        ((1.0 - t.cos()) / t2, (t - t.sin()) / (t2 * t))
    };
    let uv = u.cross(v);
    v + uv * a + u.cross(&uv) * b
}

/// Closed-form `dexp⁻¹_u(w)` on so(3) vectors.
pub fn dexpinv_so3(u: &Vector3<f64>, w: &Vector3<f64>) -> Vector3<f64> {
    let t2 = u.norm_squared();
    let t = t2.sqrt();
    let c = if t < 1e-3 {
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        (1.0 - 0.5 * t / (0.5 * t).tan()) / t2
    };
    let uw = u.cross(w);
    w - uw * 0.5 + u.cross(&uw) * c
}

/// The Cayley map `(I − a/2)⁻¹(I + a/2)`.
pub fn cayley(a: &AlgebraElement) -> Result<GroupElement> {
    if !a.is_finite() {
        return Err(Error::numeric("cayley: non-finite input"));
    }
    let n = a.descriptor().matrix_size();
    let id = DMatrix::<f64>::identity(n, n);
    let half = a.matrix() * 0.5;
    let m = (&id - &half)
        .lu()
        .solve(&(&id + &half))
        .ok_or_else(|| Error::numeric("cayley: I − a/2 is singular"))?;
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::numeric("cayley: I − a/2 is singular"));
    }
    Ok(GroupElement::from_raw(a.descriptor().clone(), m))
}

/// Right-trivialized inverse differential of the Cayley map,
/// `(I − y/2) v (I + y/2)`.
pub fn dcay_inv(y: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
    y.descriptor().check_same(v.descriptor())?;
    let n = y.descriptor().matrix_size();
    let id = DMatrix::<f64>::identity(n, n);
    let half = y.matrix() * 0.5;
    AlgebraElement::projected(v.descriptor().clone(), &((&id - &half) * v.matrix() * (&id + &half)))
}

/// Right-trivialized differential of the Cayley map,
/// `(I − y/2)⁻¹ v (I + y/2)⁻¹`.
pub fn dcay(y: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
    y.descriptor().check_same(v.descriptor())?;
    let n = y.descriptor().matrix_size();
    let id = DMatrix::<f64>::identity(n, n);
    let half = y.matrix() * 0.5;
    let a = (&id - &half).try_inverse().ok_or_else(|| Error::numeric("dcay: I − y/2 is singular"))?;
    let b = (&id + &half).try_inverse().ok_or_else(|| Error::numeric("dcay: I + y/2 is singular"))?;
    AlgebraElement::projected(v.descriptor().clone(), &(a * v.matrix() * b))
}

/// so(3) element from a 3-vector (alias of [`AlgebraElement::so3`]).
pub fn so3(v: Vector3<f64>) -> AlgebraElement {
    AlgebraElement::so3(v)
}

/// Rotation group element from a 3×3 matrix.
pub fn rotation(r: &DMatrix<f64>) -> Result<GroupElement> {
    GroupElement::new(AlgebraDescriptor::so3(), r.clone())
}
