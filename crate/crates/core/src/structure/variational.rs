use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::cotangent::{symplectic_matrix, TrivializedCotangentPoint, TrivializedSystem};
use crate::coords::{CoordinateKind, CoordinateMap};
use crate::error::{Error, Result};
use crate::integrators::{StepOutcome, Stepper};
use crate::lie_core::{
    ad_star, co_adjoint, dexp_so3, group_exp, group_log, AlgebraElement, CoAlgebraElement, GroupElement,
};

/// Fixed-point controls for the implicit structure-preserving steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tolerance: 1e-13, max_iterations: 100 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::domain("solver tolerance and iteration cap must be positive"));
        }
        Ok(())
    }
}

/// `dτ*_ξ ν`, the pairing adjoint of the right-trivialized differential of
/// the coordinate map, so `⟨dτ*_ξ ν, v⟩ = ⟨ν, dτ_ξ v⟩`.
pub fn dtau_star(tau: &CoordinateMap, xi: &AlgebraElement, nu: &CoAlgebraElement) -> Result<CoAlgebraElement> {
    let desc = xi.descriptor();
    desc.check_same(nu.descriptor())?;
    if desc.is_so3() && matches!(tau.kind(), CoordinateKind::Exp { .. }) {
        // dexp_u = I + a û + b û², whose transpose is dexp_{−u}.
        return Ok(CoAlgebraElement::so3(dexp_so3(&-xi.so3_vector(), &nu.so3_vector())));
    }
    let n = desc.dim();
    let mut c = DVector::zeros(n);
    for (i, b) in desc.basis().into_iter().enumerate() {
        let e = AlgebraElement::new(desc.clone(), b)?;
        c[i] = nu.pairing(&tau.dpsi(xi, &e)?)?;
    }
    CoAlgebraElement::from_coords(desc.clone(), &c)
}

fn check_chart(tau: &CoordinateMap, xi: &AlgebraElement) -> Result<()> {
    if !xi.is_finite() {
        return Err(Error::numeric("non-finite increment"));
    }
    if matches!(tau.kind(), CoordinateKind::Exp { .. }) && xi.norm() >= std::f64::consts::PI {
        return Err(Error::chart(format!("increment norm {:.3} exceeds the exponential's injectivity radius", xi.norm())));
    }
    Ok(())
}

/// One step of the variational integrator
/// `g₁ = τ(h f₁(g₀, μ̄)) g₀`, `μ₁ = Ad*_{Δ⁻¹}(μ₀ + h f₂(g₀, μ̄))`,
/// `μ̄ = dτ*_ξ μ₁`, solved by fixed-point iteration on `μ̄`.
pub fn variational_step(
    sys: &dyn TrivializedSystem,
    z: &TrivializedCotangentPoint,
    h: f64,
    tau: &CoordinateMap,
    cfg: &SolverConfig,
) -> Result<StepOutcome<TrivializedCotangentPoint>> {
    cfg.validate()?;
    z.descriptor().check_same(tau.descriptor())?;
    let g = &z.g;
    // Everything one iterate needs, as a function of μ̄.
    let sweep = |mubar: &CoAlgebraElement| -> Result<(GroupElement, CoAlgebraElement, CoAlgebraElement)> {
        let xi = sys.f1(g, mubar)?.scale(h);
        check_chart(tau, &xi)?;
        let delta = tau.psi(&xi)?;
        let kick = &z.mu + &sys.f2(g, mubar)?.scale(h);
        let mu1 = co_adjoint(&delta.inverse()?, &kick)?;
        let next = dtau_star(tau, &xi, &mu1)?;
        Ok((delta, mu1, next))
    };
    let mut mubar = z.mu.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        let (_, _, next) = sweep(&mubar)?;
        residual = (next.coords() - mubar.coords()).norm();
        if !residual.is_finite() {
            return Err(Error::numeric("variational iteration diverged"));
        }
        mubar = next;
        if residual <= cfg.tolerance {
            let (delta, mu1, _) = sweep(&mubar)?;
            let state = TrivializedCotangentPoint::new(delta.mul(g)?, mu1)?;
            return Ok(StepOutcome { state, iterations: it });
        }
    }
    Err(Error::Solver { iterations: cfg.max_iterations, residual })
}

/// The explicit counterpart: `μ̄` replaced by `μ₀` and `τ = exp`. Not
/// symplectic; used as a negative control.
pub fn cotangent_lie_euler_step(sys: &dyn TrivializedSystem, z: &TrivializedCotangentPoint, h: f64) -> Result<TrivializedCotangentPoint> {
    let xi = sys.f1(&z.g, &z.mu)?.scale(h);
    let delta = group_exp(&xi)?;
    let kick = &z.mu + &sys.f2(&z.g, &z.mu)?.scale(h);
    TrivializedCotangentPoint::new(delta.mul(&z.g)?, co_adjoint(&delta.inverse()?, &kick)?)
}

/// Classical RK4 on the ambient matrices, `substeps` per call: a
/// high-accuracy surrogate of the exact flow.
pub fn reference_flow(sys: &dyn TrivializedSystem, z: &TrivializedCotangentPoint, h: f64, substeps: usize) -> Result<TrivializedCotangentPoint> {
    if substeps == 0 {
        return Err(Error::domain("reference flow needs at least one substep"));
    }
    let desc = z.descriptor().clone();
    let rhs = |g: &DMatrix<f64>, mu: &DVector<f64>| -> Result<(DMatrix<f64>, DVector<f64>)> {
        let ge = GroupElement::from_raw(desc.clone(), g.clone());
        let me = CoAlgebraElement::from_coords(desc.clone(), mu)?;
        let f1 = sys.f1(&ge, &me)?;
        let dmu = sys.f2(&ge, &me)?.coords() - ad_star(&f1, &me)?.coords();
        Ok((f1.matrix() * g, dmu))
    };
    let dt = h / substeps as f64;
    let mut g = z.g.matrix().clone();
    let mut mu = z.mu.coords();
    for _ in 0..substeps {
        let (k1g, k1m) = rhs(&g, &mu)?;
        let (k2g, k2m) = rhs(&(&g + &k1g * (0.5 * dt)), &(&mu + &k1m * (0.5 * dt)))?;
        let (k3g, k3m) = rhs(&(&g + &k2g * (0.5 * dt)), &(&mu + &k2m * (0.5 * dt)))?;
        let (k4g, k4m) = rhs(&(&g + &k3g * dt), &(&mu + &k3m * dt))?;
        g += (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (dt / 6.0);
        mu += (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (dt / 6.0);
    }
    let out = TrivializedCotangentPoint::new(GroupElement::from_raw(desc.clone(), g), CoAlgebraElement::from_coords(desc, &mu)?)?;
    if !out.is_finite() {
        return Err(Error::numeric("reference flow produced non-finite values"));
    }
    Ok(out)
}

#[derive(Clone)]
pub struct VariationalStepper {
    pub system: Arc<dyn TrivializedSystem>,
    pub tau: CoordinateMap,
    pub solver: SolverConfig,
}

impl Stepper for VariationalStepper {
    type State = TrivializedCotangentPoint;

    fn step(&self, z: &TrivializedCotangentPoint, h: f64) -> Result<StepOutcome<TrivializedCotangentPoint>> {
        variational_step(self.system.as_ref(), z, h, &self.tau, &self.solver)
    }

    fn name(&self) -> String {
        format!("variational-{}", self.tau.name())
    }
}

#[derive(Clone)]
pub struct CotangentLieEulerStepper {
    pub system: Arc<dyn TrivializedSystem>,
}

impl Stepper for CotangentLieEulerStepper {
    type State = TrivializedCotangentPoint;

    fn step(&self, z: &TrivializedCotangentPoint, h: f64) -> Result<StepOutcome<TrivializedCotangentPoint>> {
        cotangent_lie_euler_step(self.system.as_ref(), z, h).map(StepOutcome::explicit)
    }

    fn name(&self) -> String {
        "cotangent-lie-euler".into()
    }
}

#[derive(Clone)]
pub struct ReferenceFlowStepper {
    pub system: Arc<dyn TrivializedSystem>,
    pub substeps: usize,
}

impl Stepper for ReferenceFlowStepper {
    type State = TrivializedCotangentPoint;

    fn step(&self, z: &TrivializedCotangentPoint, h: f64) -> Result<StepOutcome<TrivializedCotangentPoint>> {
        reference_flow(self.system.as_ref(), z, h, self.substeps).map(StepOutcome::explicit)
    }

    fn name(&self) -> String {
        format!("reference-rk4x{}", self.substeps)
    }
}

/// Central-difference step used by [`symplecticity_check`].
pub const SYMPLECTIC_FD_STEP: f64 = 1e-5;

/// `‖JᵀΩ(z₁)J − Ω(z₀)‖∞` where `J` is the central-difference Jacobian of
/// the one-step map in right-trivialized coordinates `(ζ, δν)`, with
/// perturbations `(exp(ζ) g, μ + δν)`.
pub fn symplecticity_check<S>(stepper: &S, z: &TrivializedCotangentPoint, h: f64) -> Result<f64>
where
    S: Stepper<State = TrivializedCotangentPoint> + ?Sized,
{
    let desc = z.descriptor().clone();
    let n = desc.dim();
    let eps = SYMPLECTIC_FD_STEP;
    let z1 = stepper.step(z, h)?.state;
    let g1_inv = z1.g.inverse()?;
    let chart = |w: &TrivializedCotangentPoint| -> Result<DVector<f64>> {
        let zeta = group_log(&w.g.mul(&g1_inv)?)?.coords();
        let nu = w.mu.coords() - z1.mu.coords();
        Ok(DVector::from_iterator(2 * n, zeta.iter().chain(nu.iter()).copied()))
    };
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        let mut images = Vec::with_capacity(2);
        for s in [eps, -eps] {
            let e = DVector::from_fn(n, |k, _| if k == col % n { s } else { 0.0 });
            let w = if col < n {
                let g = group_exp(&AlgebraElement::from_coords(desc.clone(), &e)?)?.mul(&z.g)?;
                TrivializedCotangentPoint::new(g, z.mu.clone())?
            } else {
                TrivializedCotangentPoint::new(z.g.clone(), &z.mu + &CoAlgebraElement::from_coords(desc.clone(), &e)?)?
            };
            images.push(chart(&stepper.step(&w, h)?.state)?);
        }
        jac.set_column(col, &((&images[0] - &images[1]) / (2.0 * eps)));
    }
    if !jac.iter().all(|x| x.is_finite()) {
        return Err(Error::numeric("finite-difference Jacobian is not finite"));
    }
    let diff = jac.transpose() * symplectic_matrix(&z1)? * &jac - symplectic_matrix(z)?;
    Ok((0..2 * n).map(|i| diff.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max))
}
