use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::lie_core::{bracket, group_exp, AlgebraDescriptor, AlgebraElement, CoAlgebraElement, GroupElement};

/// A point `(g, μ)` of `G ⋉ 𝔤*`, the right-trivialized cotangent bundle.
#[derive(Clone, Debug)]
pub struct TrivializedCotangentPoint {
    pub g: GroupElement,
    pub mu: CoAlgebraElement,
}

impl TrivializedCotangentPoint {
    pub fn new(g: GroupElement, mu: CoAlgebraElement) -> Result<Self> {
        g.descriptor().check_same(mu.descriptor())?;
        Ok(Self { g, mu })
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        self.g.descriptor()
    }

    /// Max of the Frobenius distance between the group parts and the
    /// coordinate distance between the momenta.
    pub fn distance(&self, other: &Self) -> f64 {
        let dg = (self.g.matrix() - other.g.matrix()).norm();
        let dm = (self.mu.coords() - other.mu.coords()).norm();
        dg.max(dm)
    }

    pub fn is_finite(&self) -> bool {
        self.g.is_finite() && self.mu.is_finite()
    }
}

pub type CotangentScalar = Arc<dyn Fn(&GroupElement, &CoAlgebraElement) -> f64 + Send + Sync>;
pub type CotangentToDual = Arc<dyn Fn(&GroupElement, &CoAlgebraElement) -> Result<CoAlgebraElement> + Send + Sync>;
pub type CotangentToAlgebra = Arc<dyn Fn(&GroupElement, &CoAlgebraElement) -> Result<AlgebraElement> + Send + Sync>;
pub type TangentScalar = Arc<dyn Fn(&GroupElement, &AlgebraElement) -> f64 + Send + Sync>;
pub type TangentToDual = Arc<dyn Fn(&GroupElement, &AlgebraElement) -> Result<CoAlgebraElement> + Send + Sync>;

/// A mechanical system in the form `ġ = f₁ g`, `μ̇ = f₂ − ad*_{f₁} μ`.
pub trait TrivializedSystem: Send + Sync {
    fn f1(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<AlgebraElement>;
    fn f2(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<CoAlgebraElement>;
    /// The conserved energy.
    fn energy(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<f64>;
}

/// `H(g, μ)` with its partials: `dh_g` is right-trivialized (`R_g*∂H/∂g`).
#[derive(Clone)]
pub struct TrivializedHamiltonian {
    pub h: CotangentScalar,
    pub dh_g: CotangentToDual,
    pub dh_mu: CotangentToAlgebra,
}

impl TrivializedHamiltonian {
    /// Free rigid body `H = ½ μ·𝕀⁻¹μ` on so(3).
    pub fn rigid_body(inertia: Vector3<f64>) -> Self {
        Self::heavy_top(inertia, Vector3::zeros(), Vector3::zeros())
    }

    /// `H = ½ μ·𝕀⁻¹μ + χ·(g b)`: a rigid body in the linear potential
    /// `χ` felt by the body-fixed point `b`.
    pub fn heavy_top(inertia: Vector3<f64>, chi: Vector3<f64>, b: Vector3<f64>) -> Self {
        let inv = inertia.map(|v| 1.0 / v);
        let gb = move |g: &GroupElement| {
            let m = g.matrix();
            Vector3::new(
                m[(0, 0)] * b[0] + m[(0, 1)] * b[1] + m[(0, 2)] * b[2],
                m[(1, 0)] * b[0] + m[(1, 1)] * b[1] + m[(1, 2)] * b[2],
                m[(2, 0)] * b[0] + m[(2, 1)] * b[1] + m[(2, 2)] * b[2],
            )
        };
        Self {
            h: Arc::new(move |g, mu| {
                let m = mu.so3_vector();
                0.5 * m.dot(&inv.component_mul(&m)) + chi.dot(&gb(g))
            }),
            dh_g: Arc::new(move |g, _| Ok(CoAlgebraElement::so3(gb(g).cross(&chi)))),
            dh_mu: Arc::new(move |_, mu| Ok(AlgebraElement::so3(inv.component_mul(&mu.so3_vector())))),
        }
    }

    /// Largest deviation of `dh_g`, `dh_mu` from central differences with step `eps`.
    pub fn partials_defect(&self, z: &TrivializedCotangentPoint, eps: f64) -> Result<f64> {
        let desc = z.descriptor().clone();
        let dg = (self.dh_g)(&z.g, &z.mu)?.coords();
        let dm = (self.dh_mu)(&z.g, &z.mu)?.coords();
        let mut worst: f64 = 0.0;
        for i in 0..desc.dim() {
            let e = DVector::from_fn(desc.dim(), |k, _| if k == i { eps } else { 0.0 });
            let step = AlgebraElement::from_coords(desc.clone(), &e)?;
            let gp = group_exp(&step)?.mul(&z.g)?;
            let gm = group_exp(&(-&step))?.mul(&z.g)?;
            let fd = ((self.h)(&gp, &z.mu) - (self.h)(&gm, &z.mu)) / (2.0 * eps);
            worst = worst.max((fd - dg[i]).abs());
            let de = CoAlgebraElement::from_coords(desc.clone(), &e)?;
            let fd = ((self.h)(&z.g, &(&z.mu + &de)) - (self.h)(&z.g, &(&z.mu - &de))) / (2.0 * eps);
            worst = worst.max((fd - dm[i]).abs());
        }
        Ok(worst)
    }
}

impl TrivializedSystem for TrivializedHamiltonian {
    fn f1(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<AlgebraElement> {
        (self.dh_mu)(g, mu)
    }

    fn f2(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<CoAlgebraElement> {
        Ok(-(self.dh_g)(g, mu)?)
    }

    fn energy(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<f64> {
        Ok((self.h)(g, mu))
    }
}

/// `ℓ(g, ξ)` with right-trivialized partials and the inverse Legendre map `ι`.
#[derive(Clone)]
pub struct TrivializedLagrangian {
    pub l: TangentScalar,
    pub dl_g: TangentToDual,
    pub dl_xi: TangentToDual,
    pub legendre_inverse: CotangentToAlgebra,
}

impl TrivializedLagrangian {
    /// `ℓ(g, ξ) = ½ (𝕀ξ, ξ)` on so(3).
    pub fn rigid_body(inertia: Vector3<f64>) -> Self {
        let inv = inertia.map(|v| 1.0 / v);
        Self {
            l: Arc::new(move |_, xi| {
                let x = xi.so3_vector();
                0.5 * x.dot(&inertia.component_mul(&x))
            }),
            dl_g: Arc::new(|_, _| Ok(CoAlgebraElement::zero(AlgebraDescriptor::so3()))),
            dl_xi: Arc::new(move |_, xi| Ok(CoAlgebraElement::so3(inertia.component_mul(&xi.so3_vector())))),
            legendre_inverse: Arc::new(move |_, mu| Ok(AlgebraElement::so3(inv.component_mul(&mu.so3_vector())))),
        }
    }

    /// `‖∂ℓ/∂ξ(g, ι(g, μ)) − μ‖`.
    pub fn legendre_defect(&self, z: &TrivializedCotangentPoint) -> Result<f64> {
        let xi = (self.legendre_inverse)(&z.g, &z.mu)?;
        Ok(((self.dl_xi)(&z.g, &xi)?.coords() - z.mu.coords()).norm())
    }
}

impl TrivializedSystem for TrivializedLagrangian {
    fn f1(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<AlgebraElement> {
        (self.legendre_inverse)(g, mu)
    }

    fn f2(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<CoAlgebraElement> {
        let xi = (self.legendre_inverse)(g, mu)?;
        (self.dl_g)(g, &xi)
    }

    fn energy(&self, g: &GroupElement, mu: &CoAlgebraElement) -> Result<f64> {
        let xi = (self.legendre_inverse)(g, mu)?;
        Ok(mu.pairing(&xi)? - (self.l)(g, &xi))
    }
}

/// `ω_{(g,μ)}((ξ₁,δν₁),(ξ₂,δν₂)) = ⟨δν₂,ξ₁⟩ − ⟨δν₁,ξ₂⟩ − ⟨μ,[ξ₁,ξ₂]⟩`.
pub fn symplectic_form(
    z: &TrivializedCotangentPoint,
    v1: (&AlgebraElement, &CoAlgebraElement),
    v2: (&AlgebraElement, &CoAlgebraElement),
) -> Result<f64> {
    let d = z.descriptor();
    for x in [v1.0.descriptor(), v1.1.descriptor(), v2.0.descriptor(), v2.1.descriptor()] {
        d.check_same(x)?;
    }
    Ok(v2.1.pairing(v1.0)? - v1.1.pairing(v2.0)? - z.mu.pairing(&bracket(v1.0, v2.0)?)?)
}

/// Matrix of `ω` at `z` in the coordinates `(ξ, δν)` of the orthonormal basis.
pub fn symplectic_matrix(z: &TrivializedCotangentPoint) -> Result<DMatrix<f64>> {
    let desc = z.descriptor();
    let n = desc.dim();
    let basis: Vec<AlgebraElement> = desc
        .basis()
        .into_iter()
        .map(|b| AlgebraElement::new(desc.clone(), b))
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        out[(i, n + i)] = 1.0;
        out[(n + i, i)] = -1.0;
        for j in 0..n {
            out[(i, j)] = -z.mu.pairing(&bracket(&basis[i], &basis[j])?)?;
        }
    }
    if !out.iter().all(|x| x.is_finite()) {
        return Err(Error::numeric("non-finite symplectic matrix"));
    }
    Ok(out)
}
