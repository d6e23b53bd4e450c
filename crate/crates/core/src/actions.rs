//! Group actions on manifolds, their infinitesimal generators, and vector
//! fields presented as maps `f: M → 𝔤`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::lie_core::{
    ad_star, co_adjoint, AlgebraDescriptor, AlgebraElement, AlgebraKind, CoAlgebraElement, GroupElement,
};

pub use crate::lie_core::phi1;

/// Tolerance on the unit norm of sphere points.
pub const SPHERE_TOL: f64 = 1e-12;
/// Tolerance on the symmetry of symmetric-matrix points.
pub const SYMMETRY_TOL: f64 = 1e-13;

/// A point on one of the supported manifolds.
#[derive(Clone, Debug)]
pub enum ManifoldPoint {
    Group(GroupElement),
    /// A unit vector.
    Sphere(DVector<f64>),
    /// A point of a coadjoint orbit in 𝔤*.
    Momentum(CoAlgebraElement),
    /// A symmetric matrix, acted on by conjugation.
    Symmetric(DMatrix<f64>),
    /// A point of ℝⁿ, acted on by affine maps.
    Flat(DVector<f64>),
}

impl ManifoldPoint {
    /// A sphere point; the vector must have unit norm to [`SPHERE_TOL`].
    pub fn sphere(x: DVector<f64>) -> Result<Self> {
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::numeric("non-finite sphere point"));
        }
        if (x.norm() - 1.0).abs() > SPHERE_TOL {
            return Err(Error::domain(format!("sphere point has norm {}", x.norm())));
        }
        Ok(ManifoldPoint::Sphere(x))
    }

    /// A sphere point from any nonzero vector, normalized.
    pub fn sphere_normalized(x: DVector<f64>) -> Result<Self> {
        let n = x.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::domain("cannot normalize a zero or non-finite vector"));
        }
        Ok(ManifoldPoint::Sphere(x / n))
    }

    pub fn symmetric(x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != x.ncols() {
            return Err(Error::domain("symmetric point must be square"));
        }
        if (&x - x.transpose()).amax() > SYMMETRY_TOL * x.amax().max(1.0) {
            return Err(Error::domain("matrix is not symmetric"));
        }
        Ok(ManifoldPoint::Symmetric((&x + x.transpose()) * 0.5))
    }

    /// The point as a matrix in its ambient space (vectors become columns).
    pub fn ambient(&self) -> DMatrix<f64> {
        match self {
            ManifoldPoint::Group(g) => g.matrix().clone(),
            ManifoldPoint::Sphere(x) | ManifoldPoint::Flat(x) => DMatrix::from_column_slice(x.len(), 1, x.as_slice()),
            ManifoldPoint::Momentum(m) => m.matrix().clone(),
            ManifoldPoint::Symmetric(x) => x.clone(),
        }
    }

    /// Flattened ambient coordinates (column-major).
    pub fn ambient_coords(&self) -> Vec<f64> {
        match self {
            ManifoldPoint::Momentum(m) => m.coords().as_slice().to_vec(),
            _ => self.ambient().as_slice().to_vec(),
        }
    }

    /// Frobenius distance between ambient representations.
    pub fn distance(&self, other: &ManifoldPoint) -> Result<f64> {
        let a = self.ambient();
        let b = other.ambient();
        if a.shape() != b.shape() || self.variant_name() != other.variant_name() {
            return Err(Error::domain("points live on different manifolds"));
        }
        Ok((a - b).norm())
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            ManifoldPoint::Group(_) => "group",
            ManifoldPoint::Sphere(_) => "sphere",
            ManifoldPoint::Momentum(_) => "momentum",
            ManifoldPoint::Symmetric(_) => "symmetric",
            ManifoldPoint::Flat(_) => "flat",
        }
    }

    pub fn as_sphere(&self) -> Result<&DVector<f64>> {
        match self {
            ManifoldPoint::Sphere(x) => Ok(x),
            other => Err(Error::domain(format!("expected a sphere point, got {}", other.variant_name()))),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.ambient().iter().all(|x| x.is_finite())
    }
}

/// A scalar function on a manifold's ambient vector representation.
pub type ScalarField = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// The supported group actions.
#[derive(Clone)]
pub enum ActionKind {
    /// `g · x` on the group itself.
    LeftMultiplication,
    /// `x · g⁻¹` on the group itself.
    RightMultiplication,
    /// Rotations of the unit sphere in ℝ³. The optional isotropy field `α`
    /// adds `α(y)·hat(y)` to the presented algebra element, which leaves the
    /// vector field unchanged but alters the integrator.
    SphereSO3 { isotropy: Option<ScalarField> },
    /// `(A, b) · x = Ax + b`. `linear` is the stiff linear part `L` carried
    /// by presentations of semilinear problems.
    Affine { linear: DMatrix<f64> },
    /// `g · μ = Ad*_{g⁻¹} μ`.
    Coadjoint,
    /// `g · X = g X gᵀ`.
    IsospectralConjugation,
}

impl fmt::Debug for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionKind::LeftMultiplication => write!(f, "LeftMultiplication"),
            ActionKind::RightMultiplication => write!(f, "RightMultiplication"),
            ActionKind::SphereSO3 { isotropy } => {
                write!(f, "SphereSO3 {{ isotropy: {} }}", if isotropy.is_some() { "Some(..)" } else { "None" })
            }
            ActionKind::Affine { linear } => write!(f, "Affine {{ linear: {}x{} }}", linear.nrows(), linear.ncols()),
            ActionKind::Coadjoint => write!(f, "Coadjoint"),
            ActionKind::IsospectralConjugation => write!(f, "IsospectralConjugation"),
        }
    }
}

fn mismatch(a: &ActionKind, what: &str) -> Error {
    Error::domain(format!("{a:?} cannot act on {what}"))
}

fn check_compatible(a: &ActionKind, desc: &AlgebraDescriptor, x: &ManifoldPoint) -> Result<()> {
    let ok = match (a, x) {
        (ActionKind::LeftMultiplication | ActionKind::RightMultiplication, ManifoldPoint::Group(g)) => {
            g.descriptor() == desc
        }
        (ActionKind::SphereSO3 { .. }, ManifoldPoint::Sphere(y)) => desc.is_so3() && y.len() == 3,
        (ActionKind::Affine { .. }, ManifoldPoint::Flat(y)) => {
            matches!(desc.kind(), AlgebraKind::Affine(n) if *n == y.len())
        }
        (ActionKind::Coadjoint, ManifoldPoint::Momentum(m)) => m.descriptor() == desc,
        (ActionKind::IsospectralConjugation, ManifoldPoint::Symmetric(s)) => desc.matrix_size() == s.nrows(),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(mismatch(a, &format!("a {} point with algebra {}", x.variant_name(), desc)))
    }
}

/// Applies `g` to `x`.
pub fn act(a: &ActionKind, g: &GroupElement, x: &ManifoldPoint) -> Result<ManifoldPoint> {
    check_compatible(a, g.descriptor(), x)?;
    let out = match (a, x) {
        (ActionKind::LeftMultiplication, ManifoldPoint::Group(m)) => ManifoldPoint::Group(g.mul(m)?),
        (ActionKind::RightMultiplication, ManifoldPoint::Group(m)) => ManifoldPoint::Group(m.mul(&g.inverse()?)?),
        (ActionKind::SphereSO3 { .. }, ManifoldPoint::Sphere(y)) => {
            let r = g.matrix() * y;
            let n = r.norm();
            ManifoldPoint::Sphere(r / n)
        }
        (ActionKind::Affine { .. }, ManifoldPoint::Flat(y)) => {
            let (am, b) = g.affine_parts().expect("affine descriptor");
            ManifoldPoint::Flat(am * y + b)
        }
        (ActionKind::Coadjoint, ManifoldPoint::Momentum(m)) => ManifoldPoint::Momentum(co_adjoint(&g.inverse()?, m)?),
        (ActionKind::IsospectralConjugation, ManifoldPoint::Symmetric(s)) => {
            let y = g.matrix() * s * g.matrix().transpose();
            ManifoldPoint::Symmetric((&y + y.transpose()) * 0.5)
        }
        _ => unreachable!("checked above"),
    };
    if !out.is_finite() {
        return Err(Error::numeric("action produced non-finite values"));
    }
    Ok(out)
}

/// The infinitesimal generator `ρ(ξ)|ₓ = d/dt exp(tξ)·x` at `t = 0`, as an
/// ambient matrix (vectors as columns, covectors as their stored matrices).
pub fn infinitesimal(a: &ActionKind, xi: &AlgebraElement, x: &ManifoldPoint) -> Result<DMatrix<f64>> {
    check_compatible(a, xi.descriptor(), x)?;
    Ok(match (a, x) {
        (ActionKind::LeftMultiplication, ManifoldPoint::Group(m)) => xi.matrix() * m.matrix(),
        (ActionKind::RightMultiplication, ManifoldPoint::Group(m)) => -(m.matrix() * xi.matrix()),
        (ActionKind::SphereSO3 { .. }, ManifoldPoint::Sphere(y)) => {
            let v = xi.so3_vector().cross(&Vector3::new(y[0], y[1], y[2]));
            DMatrix::from_column_slice(3, 1, v.as_slice())
        }
        (ActionKind::Affine { .. }, ManifoldPoint::Flat(y)) => {
            let (l, c) = xi.affine_parts().expect("affine descriptor");
            let v = l * y + c;
            DMatrix::from_column_slice(v.len(), 1, v.as_slice())
        }
        (ActionKind::Coadjoint, ManifoldPoint::Momentum(m)) => -ad_star(xi, m)?.matrix().clone(),
        (ActionKind::IsospectralConjugation, ManifoldPoint::Symmetric(s)) => xi.matrix() * s - s * xi.matrix(),
        _ => unreachable!("checked above"),
    })
}

/// A map `f: M → 𝔤` presenting the vector field `F(x) = ρ(f(x))|ₓ`.
pub type AlgebraField = Arc<dyn Fn(&ManifoldPoint) -> Result<AlgebraElement> + Send + Sync>;

/// A vector field presented through an action.
#[derive(Clone)]
pub struct FieldPresentation {
    action: ActionKind,
    descriptor: AlgebraDescriptor,
    map: AlgebraField,
}

impl fmt::Debug for FieldPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldPresentation")
            .field("action", &self.action)
            .field("descriptor", &self.descriptor)
            .finish_non_exhaustive()
    }
}

impl FieldPresentation {
    pub fn new(action: ActionKind, descriptor: AlgebraDescriptor, map: AlgebraField) -> Result<Self> {
        match &action {
            ActionKind::SphereSO3 { .. } if !descriptor.is_so3() => {
                return Err(Error::domain("the sphere action needs so(3)"));
            }
            ActionKind::Affine { linear } => match descriptor.kind() {
                AlgebraKind::Affine(n) if linear.nrows() == *n && linear.ncols() == *n => {}
                _ => return Err(Error::domain("affine action needs aff(n) with an n×n linear part")),
            },
            _ => {}
        }
        Ok(Self { action, descriptor, map })
    }

    pub fn action(&self) -> &ActionKind {
        &self.action
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.descriptor
    }

    /// `f(x)`, including the isotropy term of the sphere action.
    pub fn eval(&self, x: &ManifoldPoint) -> Result<AlgebraElement> {
        let mut xi = (self.map)(x)?;
        self.descriptor.check_same(xi.descriptor())?;
        if let (ActionKind::SphereSO3 { isotropy: Some(alpha) }, ManifoldPoint::Sphere(y)) = (&self.action, x) {
            let a = alpha(y);
            xi = &xi + &AlgebraElement::so3(Vector3::new(y[0], y[1], y[2]) * a);
        }
        if !xi.is_finite() {
            return Err(Error::numeric("vector field produced non-finite values"));
        }
        Ok(xi)
    }

    /// The presented vector field `ρ(f(x))|ₓ`.
    pub fn vector_field(&self, x: &ManifoldPoint) -> Result<DMatrix<f64>> {
        infinitesimal(&self.action, &self.eval(x)?, x)
    }

    /// The same field and map with a different sphere isotropy.
    pub fn with_isotropy(&self, isotropy: Option<ScalarField>) -> Result<Self> {
        match self.action {
            ActionKind::SphereSO3 { .. } => Ok(Self {
                action: ActionKind::SphereSO3 { isotropy },
                descriptor: self.descriptor.clone(),
                map: self.map.clone(),
            }),
            _ => Err(Error::domain("isotropy only applies to the sphere action")),
        }
    }
}

/// Closed-form Lie–Euler step on S² for `f(y)` orthogonal to `y` with
/// isotropy `α(y)`:
///
/// `y₁ = (1 − h²‖f‖²(1−cosθ)/θ²) y + h (sinθ/θ) f×y + h² ((1−cosθ)/θ²) α f`,
/// `θ = h√(‖f‖² + α²)`.
pub fn sphere_lie_euler_closed_form(f: &Vector3<f64>, alpha: f64, y: &ManifoldPoint, h: f64) -> Result<ManifoldPoint> {
    let y = y.as_sphere()?;
    if y.len() != 3 {
        return Err(Error::domain("closed form is for S² ⊂ ℝ³"));
    }
    let y = Vector3::new(y[0], y[1], y[2]);
    if f.dot(&y).abs() > 1e-12 * f.norm().max(1.0) {
        return Err(Error::domain("closed form requires (f(y), y) = 0"));
    }
    let f2 = f.norm_squared();
    let theta2 = h * h * (f2 + alpha * alpha);
    let (s, c) = if theta2 < 1e-8 {
        (1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0, 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0)
    } else {
        let t = theta2.sqrt();
        (t.sin() / t, (1.0 - t.cos()) / theta2)
    };
    let y1 = y * (1.0 - h * h * f2 * c) + f.cross(&y) * (h * s) + f * (h * h * c * alpha);
    Ok(ManifoldPoint::Sphere(DVector::from_column_slice(y1.as_slice())))
}

/// The so(3) isotropy element `α·hat(y)` at a sphere point.
pub fn sphere_isotropy_element(y: &Vector3<f64>, alpha: f64) -> AlgebraElement {
    AlgebraElement::so3(y * alpha)
}
