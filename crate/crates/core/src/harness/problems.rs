use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::actions::{ActionKind, AlgebraField, FieldPresentation, ManifoldPoint, ScalarField};
use crate::error::{Error, Result};
use crate::integrators::Observer;
use crate::lie_core::{AlgebraDescriptor, AlgebraElement, CoAlgebraElement};
use crate::structure::{Bivector, ManifoldFirstIntegral, TrivializedHamiltonian};

/// Names accepted by [`problem`], in registry order.
pub const PROBLEM_NAMES: [&str; 5] =
    ["rigid_body_sphere", "rigid_body_liepoisson", "toda_isospectral", "heat_semilinear", "isotropy_demo"];

/// Tunable problem parameters. Each problem reads only the fields it uses.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemParams {
    pub inertia: [f64; 3],
    /// Initial sphere point or momentum before normalization.
    pub initial: [f64; 3],
    /// Isotropy coefficient of `isotropy_demo`.
    pub alpha: f64,
    /// Interior grid points of `heat_semilinear`.
    pub grid: usize,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self { inertia: [1.0, 2.0, 4.0], initial: [1.0, 1.0, 1.0], alpha: 1.0, grid: 32 }
    }
}

impl ProblemParams {
    pub fn validate(&self) -> Result<()> {
        if !self.inertia.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::domain("moments of inertia must be positive"));
        }
        if !self.initial.iter().all(|v| v.is_finite()) || self.initial.iter().all(|v| *v == 0.0) {
            return Err(Error::domain("initial vector must be finite and nonzero"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::domain("alpha must be finite"));
        }
        if self.grid < 2 {
            return Err(Error::domain("grid needs at least 2 points"));
        }
        Ok(())
    }

    fn inertia(&self) -> Vector3<f64> {
        Vector3::from(self.inertia)
    }

    fn unit_initial(&self) -> Vector3<f64> {
        Vector3::from(self.initial).normalize()
    }
}

/// First-integral data for the sphere discrete-gradient methods.
#[derive(Clone)]
pub struct SphereEnergy {
    pub integral: ManifoldFirstIntegral,
    pub bivector: Bivector,
}

/// A registered test problem.
#[derive(Clone)]
pub struct ProblemDefinition {
    pub name: &'static str,
    pub description: &'static str,
    pub presentation: FieldPresentation,
    pub initial: ManifoldPoint,
    /// Quantities conserved by the exact flow.
    pub invariants: Vec<Observer<ManifoldPoint>>,
    /// Present when the discrete-gradient methods apply.
    pub sphere_energy: Option<SphereEnergy>,
    /// Right-trivialized Hamiltonian whose momentum `μ` equals `−m` for the
    /// Lie–Poisson state `m`. Present when the variational methods apply.
    pub hamiltonian: Option<Arc<TrivializedHamiltonian>>,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("presentation", &self.presentation)
            .field("invariants", &self.invariants)
            .finish_non_exhaustive()
    }
}

/// Looks up a registered problem.
pub fn problem(name: &str, params: &ProblemParams) -> Result<ProblemDefinition> {
    params.validate()?;
    match name {
        "rigid_body_sphere" => Ok(rigid_body_sphere(params)),
        "rigid_body_liepoisson" => Ok(rigid_body_liepoisson(params)),
        "toda_isospectral" => toda_isospectral(),
        "heat_semilinear" => heat_semilinear(params.grid),
        "isotropy_demo" => isotropy_demo(params),
        _ => Err(Error::Lookup { kind: "problem", name: name.to_string() }),
    }
}

/// All registered problems with default parameters.
pub fn builtin_problems() -> Vec<ProblemDefinition> {
    PROBLEM_NAMES.iter().map(|n| problem(n, &ProblemParams::default()).expect("defaults are valid")).collect()
}

fn v3(x: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

fn sphere_coords(p: &ManifoldPoint) -> Vector3<f64> {
    match p {
        ManifoldPoint::Sphere(y) => v3(y),
        ManifoldPoint::Momentum(m) => m.so3_vector(),
        _ => Vector3::repeat(f64::NAN),
    }
}

fn rigid_body_invariants(inertia: Vector3<f64>, norm_name: &str) -> Vec<Observer<ManifoldPoint>> {
    let inv = inertia.map(|v| 1.0 / v);
    vec![
        Observer::new("H", move |p| {
            let y = sphere_coords(p);
            0.5 * y.dot(&inv.component_mul(&y))
        }),
        Observer::new(norm_name, |p| sphere_coords(p).norm()),
    ]
}

/// `ẏ = y × 𝕀⁻¹y` on S², presented by `f(y) = −𝕀⁻¹y`.
fn rigid_body_sphere(params: &ProblemParams) -> ProblemDefinition {
    let inertia = params.inertia();
    let inv = inertia.map(|v| 1.0 / v);
    let map: AlgebraField = Arc::new(move |x| Ok(AlgebraElement::so3(-inv.component_mul(&v3(x.as_sphere()?)))));
    let presentation = FieldPresentation::new(ActionKind::SphereSO3 { isotropy: None }, AlgebraDescriptor::so3(), map)
        .expect("so(3) sphere presentation");
    ProblemDefinition {
        name: "rigid_body_sphere",
        description: "free rigid body on the unit sphere, H = ½(y, 𝕀⁻¹y)",
        presentation,
        initial: ManifoldPoint::Sphere(DVector::from_column_slice(params.unit_initial().as_slice())),
        invariants: rigid_body_invariants(inertia, "norm"),
        sphere_energy: Some(SphereEnergy {
            integral: ManifoldFirstIntegral::rigid_body(inertia),
            bivector: Bivector::sphere_rigid_body(),
        }),
        hamiltonian: None,
    }
}

/// The same rigid body as a Lie–Poisson system on so(3)* under the
/// coadjoint action, `ṁ = −ad*_{f(m)} m` with `f(m) = −𝕀⁻¹m`.
fn rigid_body_liepoisson(params: &ProblemParams) -> ProblemDefinition {
    let inertia = params.inertia();
    let inv = inertia.map(|v| 1.0 / v);
    let map: AlgebraField = Arc::new(move |x| match x {
        ManifoldPoint::Momentum(m) => Ok(AlgebraElement::so3(-inv.component_mul(&m.so3_vector()))),
        other => Err(Error::domain(format!("expected a momentum, got a {} point", other.variant_name()))),
    });
    let presentation =
        FieldPresentation::new(ActionKind::Coadjoint, AlgebraDescriptor::so3(), map).expect("coadjoint presentation");
    ProblemDefinition {
        name: "rigid_body_liepoisson",
        description: "free rigid body on so(3)* under the coadjoint action",
        presentation,
        initial: ManifoldPoint::Momentum(CoAlgebraElement::so3(params.unit_initial())),
        invariants: rigid_body_invariants(inertia, "casimir"),
        sphere_energy: None,
        hamiltonian: Some(Arc::new(TrivializedHamiltonian::rigid_body(inertia))),
    }
}

const TODA_SIZE: usize = 5;

/// Toda lattice `Ẋ = [B(X), X]` with `B(X)` the strictly upper part of `X`
/// minus the strictly lower part.
fn toda_isospectral() -> Result<ProblemDefinition> {
    let n = TODA_SIZE;
    let desc = AlgebraDescriptor::so(n)?;
    let d2 = desc.clone();
    let map: AlgebraField = Arc::new(move |x| match x {
        ManifoldPoint::Symmetric(m) => {
            let b = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Less => m[(i, j)],
                std::cmp::Ordering::Greater => -m[(i, j)],
                std::cmp::Ordering::Equal => 0.0,
            });
            AlgebraElement::new(d2.clone(), b)
        }
        other => Err(Error::domain(format!("expected a symmetric matrix, got a {} point", other.variant_name()))),
    });
    let presentation = FieldPresentation::new(ActionKind::IsospectralConjugation, desc, map)?;
    let x0 = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            i as f64 - 2.0
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        }
    });
    let trace_power = |k: usize| {
        move |p: &ManifoldPoint| match p {
            ManifoldPoint::Symmetric(m) => (1..k).fold(m.clone(), |acc, _| &acc * m).trace(),
            _ => f64::NAN,
        }
    };
    Ok(ProblemDefinition {
        name: "toda_isospectral",
        description: "5x5 Toda lattice in Flaschka form, isospectral flow",
        presentation,
        initial: ManifoldPoint::symmetric(x0)?,
        invariants: vec![
            Observer::new("trace1", trace_power(1)),
            Observer::new("trace2", trace_power(2)),
            Observer::new("trace3", trace_power(3)),
        ],
        sphere_energy: None,
        hamiltonian: None,
    })
}

/// Dirichlet Laplacian on `grid` interior points of the unit interval.
pub fn dirichlet_laplacian(grid: usize) -> DMatrix<f64> {
    let s = ((grid + 1) as f64).powi(2);
    DMatrix::from_fn(grid, grid, |i, j| {
        if i == j {
            -2.0 * s
        } else if i.abs_diff(j) == 1 {
            s
        } else {
            0.0
        }
    })
}

/// `u_t = Lu + u³` with `u₀ = sin(πx)`, under the affine action.
fn heat_semilinear(grid: usize) -> Result<ProblemDefinition> {
    let l = dirichlet_laplacian(grid);
    let lc = l.clone();
    let map: AlgebraField = Arc::new(move |x| match x {
        ManifoldPoint::Flat(u) => AlgebraElement::affine(&lc, &u.map(|v| v * v * v)),
        other => Err(Error::domain(format!("expected a grid function, got a {} point", other.variant_name()))),
    });
    let presentation = FieldPresentation::new(ActionKind::Affine { linear: l }, AlgebraDescriptor::affine(grid)?, map)?;
    let u0 = DVector::from_fn(grid, |i, _| (std::f64::consts::PI * (i + 1) as f64 / (grid + 1) as f64).sin());
    Ok(ProblemDefinition {
        name: "heat_semilinear",
        description: "semilinear heat equation u_t = Lu + u^3 on a Dirichlet grid",
        presentation,
        initial: ManifoldPoint::Flat(u0),
        invariants: Vec::new(),
        sphere_energy: None,
        hamiltonian: None,
    })
}

/// Axis of the rotation field of `isotropy_demo`.
pub const ISOTROPY_AXIS: [f64; 3] = [0.0, 0.6, 0.8];

/// The rotation `ẏ = w × y` on S² presented by the constant map `f ≡ w`
/// plus the isotropy term `α·hat(y)`. With `α = 0` every Lie group method
/// is exact.
fn isotropy_demo(params: &ProblemParams) -> Result<ProblemDefinition> {
    let w = Vector3::from(ISOTROPY_AXIS);
    let map: AlgebraField = Arc::new(move |_| Ok(AlgebraElement::so3(w)));
    let alpha = params.alpha;
    let isotropy: Option<ScalarField> = if alpha == 0.0 { None } else { Some(Arc::new(move |_| alpha)) };
    let presentation = FieldPresentation::new(ActionKind::SphereSO3 { isotropy }, AlgebraDescriptor::so3(), map)?;
    Ok(ProblemDefinition {
        name: "isotropy_demo",
        description: "rigid rotation of the sphere presented with an isotropy term",
        presentation,
        initial: ManifoldPoint::Sphere(DVector::from_column_slice(params.unit_initial().as_slice())),
        invariants: vec![
            Observer::new("norm", |p| sphere_coords(p).norm()),
            Observer::new("axial", move |p| sphere_coords(p).dot(&w)),
        ],
        sphere_energy: None,
        hamiltonian: None,
    })
}
