use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use super::variational::SolverConfig;
use crate::actions::ManifoldPoint;
use crate::coords::{RetractionChart, RetractionKind};
use crate::error::{Error, Result};
use crate::integrators::StepOutcome;
use crate::lie_core::{group_exp, group_log, AlgebraElement, CoAlgebraElement, GroupElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscreteGradientKind {
    GonzalezMidpoint,
    /// Averaged vector field integral by Gauss–Legendre quadrature. Exact
    /// on abelian groups for polynomial integrands of degree `< 2·nodes`,
    /// approximate otherwise.
    AvfQuadrature { nodes: usize },
}

/// Point `c` at which the Gonzalez gradient is anchored on a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MidpointRule {
    /// `c = exp(η/2)·u`, which makes `d̄H` symmetric.
    Geodesic,
    /// `c = u`.
    Start,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGradientConfig {
    pub kind: DiscreteGradientKind,
    /// Gram matrix of the inner product in algebra coordinates; identity if `None`.
    pub inner_product: Option<DMatrix<f64>>,
    pub midpoint: MidpointRule,
    pub solver: SolverConfig,
}

impl DiscreteGradientConfig {
    pub fn gonzalez() -> Self {
        Self {
            kind: DiscreteGradientKind::GonzalezMidpoint,
            inner_product: None,
            midpoint: MidpointRule::Geodesic,
            solver: SolverConfig::default(),
        }
    }

    pub fn avf(nodes: usize) -> Self {
        Self { kind: DiscreteGradientKind::AvfQuadrature { nodes }, ..Self::gonzalez() }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if let DiscreteGradientKind::AvfQuadrature { nodes: 0 } = self.kind {
            return Err(Error::domain("AVF quadrature needs at least one node"));
        }
        if let Some(m) = &self.inner_product {
            if !m.is_square() || (m - m.transpose()).amax() > 1e-12 * m.amax() || m.clone().cholesky().is_none() {
                return Err(Error::domain("inner product must be symmetric positive definite"));
            }
        }
        Ok(())
    }

    fn gram(&self, n: usize) -> Result<DMatrix<f64>> {
        match &self.inner_product {
            None => Ok(DMatrix::identity(n, n)),
            Some(m) if m.nrows() == n => Ok(m.clone()),
            Some(m) => Err(Error::domain(format!("inner product is {}x{}, algebra has dimension {n}", m.nrows(), m.ncols()))),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::domain("quadrature needs at least one node"));
    }
    let mut jac = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (0.5 * (eig.eigenvalues[i] + 1.0), eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// A function on a group with its right-trivialized differential `R_g*dH_g`.
#[derive(Clone)]
pub struct GroupFirstIntegral {
    pub h: Arc<dyn Fn(&GroupElement) -> f64 + Send + Sync>,
    pub dh: Arc<dyn Fn(&GroupElement) -> Result<CoAlgebraElement> + Send + Sync>,
}

/// `ω̄(u, v)` as a skew matrix on 𝔤* in basis coordinates.
pub type TrivializedBivector = Arc<dyn Fn(&GroupElement, &GroupElement) -> Result<DMatrix<f64>> + Send + Sync>;

/// Trivialized discrete differential `d̄H(u, v)`, satisfying
/// `H(v) − H(u) = ⟨d̄H, log(v u⁻¹)⟩` (exactly for Gonzalez) and
/// `d̄H(g, g) = R_g*dH_g`.
pub fn discrete_differential(
    cfg: &DiscreteGradientConfig,
    h: &GroupFirstIntegral,
    u: &GroupElement,
    v: &GroupElement,
) -> Result<CoAlgebraElement> {
    cfg.validate()?;
    u.descriptor().check_same(v.descriptor())?;
    let desc = u.descriptor().clone();
    let eta = group_log(&v.mul(&u.inverse()?)?)?;
    match cfg.kind {
        DiscreteGradientKind::GonzalezMidpoint => {
            let c = match cfg.midpoint {
                MidpointRule::Geodesic => group_exp(&eta.scale(0.5))?.mul(u)?,
                MidpointRule::Start => u.clone(),
            };
            let base = (h.dh)(&c)?;
            let e = eta.coords();
            let m = cfg.gram(desc.dim())?;
            let flat = &m * &e;
            let nn = e.dot(&flat);
            if nn == 0.0 {
                return Ok(base);
            }
            let defect = (h.h)(v) - (h.h)(u) - base.pairing(&eta)?;
            CoAlgebraElement::from_coords(desc, &(base.coords() + flat * (defect / nn)))
        }
        DiscreteGradientKind::AvfQuadrature { nodes } => {
            let (s, w) = gauss_legendre(nodes)?;
            let mut acc = DVector::zeros(desc.dim());
            for (si, wi) in s.iter().zip(&w) {
                let p = group_exp(&eta.scale(*si))?.mul(u)?;
                acc += (h.dh)(&p)?.coords() * *wi;
            }
            CoAlgebraElement::from_coords(desc, &acc)
        }
    }
}

fn contract(w: &DMatrix<f64>, d: &CoAlgebraElement) -> Result<AlgebraElement> {
    let n = d.descriptor().dim();
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::domain(format!("bivector must be {n}x{n}")));
    }
    if (w + w.transpose()).amax() > 1e-12 * w.amax().max(1.0) {
        return Err(Error::domain("bivector is not skew"));
    }
    AlgebraElement::from_coords(d.descriptor().clone(), &(w.transpose() * d.coords()))
}

/// `g₁ = exp(h ζ(g₀, g₁)) g₀` with `ζ = d̄H(g₀, g₁) ⌟ ω̄(g₀, g₁)`, solved by
/// fixed-point iteration on `hζ`.
pub fn dg_step_group(
    cfg: &DiscreteGradientConfig,
    h_fn: &GroupFirstIntegral,
    wbar: &TrivializedBivector,
    g: &GroupElement,
    h: f64,
) -> Result<StepOutcome<GroupElement>> {
    cfg.validate()?;
    let mut next = g.clone();
    let mut prev: Option<DVector<f64>> = None;
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.solver.max_iterations {
        let d = discrete_differential(cfg, h_fn, g, &next)?;
        let zeta = contract(&wbar(g, &next)?, &d)?.scale(h);
        if !zeta.is_finite() {
            return Err(Error::numeric("discrete-gradient iteration diverged"));
        }
        let zc = zeta.coords();
        residual = prev.as_ref().map_or(f64::INFINITY, |p| (p - &zc).norm());
        next = group_exp(&zeta)?.mul(g)?;
        if residual <= cfg.solver.tolerance || zc.norm() == 0.0 {
            return Ok(StepOutcome { state: next, iterations: it });
        }
        prev = Some(zc);
    }
    Err(Error::Solver { iterations: cfg.solver.max_iterations, residual })
}

pub type AmbientScalar = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type AmbientVectorField = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// A function on the sphere given through an ambient extension and its
/// Euclidean gradient.
#[derive(Clone)]
pub struct ManifoldFirstIntegral {
    pub h: AmbientScalar,
    pub grad: AmbientVectorField,
}

impl ManifoldFirstIntegral {
    /// `H(x) = ½ (x, 𝕀⁻¹x)`.
    pub fn rigid_body(inertia: Vector3<f64>) -> Self {
        let inv = DVector::from_column_slice(inertia.map(|v| 1.0 / v).as_slice());
        let inv2 = inv.clone();
        Self {
            h: Arc::new(move |x| 0.5 * x.dot(&inv.component_mul(x))),
            grad: Arc::new(move |x| inv2.component_mul(x)),
        }
    }
}

type Contraction = Arc<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync>;

/// An approximate bivector `ω̄(x, y)` on an embedded manifold, stored as
/// its contraction `α ↦ ω̄(x, y)(α, ·)`.
#[derive(Clone)]
pub struct Bivector {
    contract: Contraction,
}

impl Bivector {
    pub fn new(contract: impl Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static) -> Self {
        Self { contract: Arc::new(contract) }
    }

    /// `ω̄(x, y)(α, ·)`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>, alpha: &DVector<f64>) -> Result<DVector<f64>> {
        (self.contract)(x, y, alpha)
    }

    /// `ω̄(x, y)(α, β)`.
    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>, alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
        Ok(self.contract(x, y, alpha)?.dot(beta))
    }

    /// `ω̄(x, y)(α, β) = ((x + y)/2, α × β)`, the rigid-body bivector on S².
    pub fn sphere_rigid_body() -> Self {
        Self::new(|x, y, a| {
            if x.len() != 3 || y.len() != 3 || a.len() != 3 {
                return Err(Error::domain("the rigid-body bivector lives on S²"));
            }
            let m = Vector3::from_column_slice(((x + y) * 0.5).as_slice());
            Ok(DVector::from_column_slice(m.cross(&Vector3::from_column_slice(a.as_slice())).as_slice()))
        })
    }
}

/// Geodesic midpoint `(x + y)/‖x + y‖` on the sphere.
pub fn sphere_midpoint(x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let s = x + y;
    let n = s.norm();
    if !(n > 1e-12) {
        return Err(Error::chart("antipodal points have no midpoint"));
    }
    Ok(s / n)
}

/// `ω = (grad H ∧ F)/‖grad H‖²` evaluated at the midpoint `c(x, y)`, with
/// both vectors projected onto `T_cS`.
pub fn bivector_from_gradient(field: AmbientVectorField, grad: AmbientVectorField) -> Bivector {
    Bivector::new(move |x, y, alpha| {
        let c = sphere_midpoint(x, y)?;
        let proj = |v: DVector<f64>| &v - &c * c.dot(&v);
        let g = proj(grad(&c));
        let f = proj(field(&c));
        let gg = g.norm_squared();
        if gg.sqrt() < 1e-10 {
            return Err(Error::Degeneracy(format!("‖grad H‖ = {:.3e} at the midpoint", gg.sqrt())));
        }
        let (ag, af) = (alpha.dot(&g), alpha.dot(&f));
        Ok((f * ag - g * af) / gg)
    })
}

/// Discrete differential on the sphere in the chart centred at
/// `c = c(x, y)`. Returns `(c, d̄H)` with `d̄H ∈ T_cS`.
pub fn discrete_differential_retraction(
    cfg: &DiscreteGradientConfig,
    h: &ManifoldFirstIntegral,
    kind: RetractionKind,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let c = sphere_midpoint(x, y)?;
    let chart = RetractionChart::at(kind, &c)?;
    let v = chart.apply_inverse(x)?;
    let w = chart.apply_inverse(y)?;
    let eta = &w - &v;
    let d = match cfg.kind {
        DiscreteGradientKind::GonzalezMidpoint => {
            let base = chart.project(&(h.grad)(&c));
            let nn = eta.norm_squared();
            if nn == 0.0 {
                base
            } else {
                let defect = (h.h)(y) - (h.h)(x) - base.dot(&eta);
                base + &eta * (defect / nn)
            }
        }
        DiscreteGradientKind::AvfQuadrature { nodes } => {
            // ∫ (T_γφ_c)ᵀ dH|_{φ_c(γ)} along γ_s = (1 − s)v + s w.
            let (s, wts) = gauss_legendre(nodes)?;
            let n = c.len();
            let mut acc = DVector::zeros(n);
            for (si, wi) in s.iter().zip(&wts) {
                let gamma = &v * (1.0 - si) + &w * *si;
                let p = chart.apply(&gamma)?;
                let dh = (h.grad)(&p);
                let mut pulled = DVector::zeros(n);
                for k in 0..n {
                    let e = chart.project(&DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }));
                    pulled[k] = dh.dot(&chart.tangent_map(&gamma, &e)?);
                }
                acc += chart.project(&pulled) * *wi;
            }
            acc
        }
    };
    Ok((c, d))
}

/// `y₁ = φ_c(φ_c⁻¹(y₀) + h d̄H(y₀, y₁) ⌟ ω̄(y₀, y₁))` with `c = c(y₀, y₁)`,
/// solved by fixed-point iteration on `y₁`.
pub fn dg_step_retraction(
    cfg: &DiscreteGradientConfig,
    h_fn: &ManifoldFirstIntegral,
    wbar: &Bivector,
    kind: RetractionKind,
    y: &ManifoldPoint,
    h: f64,
) -> Result<StepOutcome<ManifoldPoint>> {
    cfg.validate()?;
    let x = y.as_sphere()?.clone();
    let mut next = x.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.solver.max_iterations {
        let (c, d) = discrete_differential_retraction(cfg, h_fn, kind, &x, &next)?;
        let chart = RetractionChart::at(kind, &c)?;
        let zeta = chart.project(&wbar.contract(&x, &next, &d)?);
        let big_w = chart.apply_inverse(&x)? + zeta * h;
        let cand = chart.apply(&big_w)?;
        residual = (&cand - &next).norm();
        if !residual.is_finite() {
            return Err(Error::numeric("discrete-gradient iteration diverged"));
        }
        next = cand;
        if residual <= cfg.solver.tolerance {
            return Ok(StepOutcome { state: ManifoldPoint::Sphere(next), iterations: it });
        }
    }
    Err(Error::Solver { iterations: cfg.solver.max_iterations, residual })
}

/// Closed form of the Gonzalez discrete differential for `H = ½(x, 𝕀⁻¹x)`
/// with the projective chart at the geodesic midpoint:
/// `(𝕀⁻¹m + (‖m‖² − 1)(H(y) − H(x))(y − x)/‖y − x‖²)/‖m‖`, `m = (x + y)/2`.
pub fn sphere_rigid_body_discrete_gradient(inertia: &Vector3<f64>, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
    let inv = inertia.map(|v| 1.0 / v);
    let h = |p: &Vector3<f64>| 0.5 * p.dot(&inv.component_mul(p));
    let m = (x + y) * 0.5;
    let nm = m.norm();
    let dy = y - x;
    let dd = dy.norm_squared();
    let corr = if dd == 0.0 { Vector3::zeros() } else { dy * ((nm * nm - 1.0) * (h(y) - h(x)) / dd) };
    (inv.component_mul(&m) + corr) / nm
}
