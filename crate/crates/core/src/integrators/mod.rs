//! One-step Lie group integrators and the stepping loop.
//!
//! All schemes advance `y₀` by group elements acting on it. Munthe-Kaas
//! methods solve for a single algebra element in coordinates `ψ`;
//! commutator-free and Crouch–Grossman methods compose exponentials of
//! frozen fields `F_k = f(Y_k)`.

mod cf;
mod tableau;

use std::fmt;
use std::sync::Arc;

pub use cf::{cf_step, cf_step_counted, CfScheme, CfStage};
pub use tableau::ButcherTableau;

use crate::actions::{act, FieldPresentation, ManifoldPoint};
use crate::coords::CoordinateMap;
use crate::error::{Error, Result};
use crate::lie_core::{bracket, dexpinv_truncation_for_order, group_exp, AlgebraElement};

/// One Runge–Kutta–Munthe-Kaas step:
/// `u_r = h Σ a_{rj} k̃_j`, `k_r = f(ψ(u_r)·y₀)`, `k̃_r = dψ⁻¹_{u_r}(k_r)`,
/// `y₁ = ψ(h Σ b_r k̃_r)·y₀`.
pub fn rkmk_step(
    tab: &ButcherTableau,
    map: &CoordinateMap,
    pres: &FieldPresentation,
    y0: &ManifoldPoint,
    h: f64,
) -> Result<ManifoldPoint> {
    if !tab.is_explicit() {
        return Err(Error::unsupported("implicit tableaus are not supported"));
    }
    map.descriptor().check_same(pres.descriptor())?;
    let desc = pres.descriptor().clone();
    let s = tab.stages();
    let mut kt: Vec<AlgebraElement> = Vec::with_capacity(s);
    for r in 0..s {
        let mut u = AlgebraElement::zero(desc.clone());
        for (j, k) in kt.iter().enumerate() {
            let a = tab.a_f64(r, j);
            if a != 0.0 {
                u = u.axpy(h * a, k);
            }
        }
        let y = if r == 0 { y0.clone() } else { act(pres.action(), &map.psi(&u)?, y0)? };
        let k = pres.eval(&y)?;
        kt.push(map.dpsi_inv(&u, &k)?);
    }
    let mut v = AlgebraElement::zero(desc);
    for (r, k) in kt.iter().enumerate() {
        v = v.axpy(h * tab.b_f64(r), k);
    }
    act(pres.action(), &map.psi(&v)?, y0)
}

/// The fourth-order Munthe-Kaas method with a minimal set of commutators.
pub fn rkmk4_minimal_step(pres: &FieldPresentation, y0: &ManifoldPoint, h: f64) -> Result<ManifoldPoint> {
    let a = pres.action();
    let at = |xi: &AlgebraElement| -> Result<ManifoldPoint> { act(a, &group_exp(xi)?, y0) };
    let k1 = pres.eval(y0)?.scale(h);
    let k2 = pres.eval(&at(&k1.scale(0.5))?)?.scale(h);
    let k12 = bracket(&k1, &k2)?;
    let k3 = pres.eval(&at(&k2.scale(0.5).axpy(-0.125, &k12))?)?.scale(h);
    let k4 = pres.eval(&at(&k3)?)?.scale(h);
    let k14 = bracket(&k1, &k4)?;
    let v = (&(&k1 + &k2.scale(2.0)) + &(&k3.scale(2.0) + &k4)).axpy(-0.5, &k14).scale(1.0 / 6.0);
    at(&v)
}

/// `y₁ = exp(h f(y₀))·y₀`.
pub fn lie_euler_step(pres: &FieldPresentation, y0: &ManifoldPoint, h: f64) -> Result<ManifoldPoint> {
    act(pres.action(), &group_exp(&pres.eval(y0)?.scale(h))?, y0)
}

/// Result of one step.
#[derive(Clone, Debug)]
pub struct StepOutcome<S> {
    pub state: S,
    /// Fixed-point iterations used by implicit schemes (0 for explicit ones).
    pub iterations: usize,
}

impl<S> StepOutcome<S> {
    pub fn explicit(state: S) -> Self {
        Self { state, iterations: 0 }
    }
}

/// A one-step map. Implementations carry their vector field and hold no
/// mutable state between calls.
pub trait Stepper: Send + Sync {
    type State: Clone;
    fn step(&self, y: &Self::State, h: f64) -> Result<StepOutcome<Self::State>>;
    fn name(&self) -> String;
}

/// The explicit Lie group methods.
#[derive(Clone, Debug)]
pub enum LieGroupMethod {
    LieEuler,
    Rkmk { tableau: ButcherTableau, map: CoordinateMap },
    Rkmk4Minimal,
    CommutatorFree(CfScheme),
}

impl LieGroupMethod {
    /// RKMK with exponential coordinates and the default dexpinv truncation
    /// for the tableau's order.
    pub fn rkmk_exp(tableau: ButcherTableau, pres: &FieldPresentation) -> Result<Self> {
        let m = dexpinv_truncation_for_order(tableau.order().unwrap_or(tableau.stages()));
        let map = CoordinateMap::exp(pres.descriptor().clone(), m)?;
        Ok(LieGroupMethod::Rkmk { tableau, map })
    }

    pub fn name(&self) -> String {
        match self {
            LieGroupMethod::LieEuler => "lie_euler".into(),
            LieGroupMethod::Rkmk { tableau, map } => format!("rkmk-{}-{}", tableau.name(), map.name()),
            LieGroupMethod::Rkmk4Minimal => "rkmk4_min".into(),
            LieGroupMethod::CommutatorFree(s) => s.name().to_string(),
        }
    }

    /// Nominal order.
    pub fn order(&self) -> Option<usize> {
        match self {
            LieGroupMethod::LieEuler => Some(1),
            LieGroupMethod::Rkmk { tableau, .. } => tableau.order(),
            LieGroupMethod::Rkmk4Minimal => Some(4),
            LieGroupMethod::CommutatorFree(s) => s.order(),
        }
    }

    pub fn step(&self, pres: &FieldPresentation, y0: &ManifoldPoint, h: f64) -> Result<ManifoldPoint> {
        match self {
            LieGroupMethod::LieEuler => lie_euler_step(pres, y0, h),
            LieGroupMethod::Rkmk { tableau, map } => rkmk_step(tableau, map, pres, y0, h),
            LieGroupMethod::Rkmk4Minimal => rkmk4_minimal_step(pres, y0, h),
            LieGroupMethod::CommutatorFree(s) => cf_step(s, pres, y0, h),
        }
    }
}

/// A Lie group method bound to a vector field.
#[derive(Clone, Debug)]
pub struct LieGroupStepper {
    pub method: LieGroupMethod,
    pub presentation: FieldPresentation,
}

impl LieGroupStepper {
    pub fn new(method: LieGroupMethod, presentation: FieldPresentation) -> Self {
        Self { method, presentation }
    }
}

impl Stepper for LieGroupStepper {
    type State = ManifoldPoint;

    fn step(&self, y: &ManifoldPoint, h: f64) -> Result<StepOutcome<ManifoldPoint>> {
        self.method.step(&self.presentation, y, h).map(StepOutcome::explicit)
    }

    fn name(&self) -> String {
        self.method.name()
    }
}

/// A named scalar function recorded along a trajectory.
pub struct Observer<S> {
    pub name: String,
    pub eval: Arc<dyn Fn(&S) -> f64 + Send + Sync>,
}

impl<S> Clone for Observer<S> {
    fn clone(&self) -> Self {
        Self { name: self.name.clone(), eval: self.eval.clone() }
    }
}

impl<S> fmt::Debug for Observer<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observer({})", self.name)
    }
}

impl<S> Observer<S> {
    pub fn new(name: &str, eval: impl Fn(&S) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.to_string(), eval: Arc::new(eval) }
    }
}

/// Grid, states and per-step diagnostics of one run.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub observer_names: Vec<String>,
    /// `observations[i][j]` is observer `j` at `times[i]`.
    pub observations: Vec<Vec<f64>>,
    /// Iterations of the step that produced `states[i]` (0 for the start).
    pub iterations: Vec<usize>,
}

impl<S> TrajectoryRecord<S> {
    pub fn final_state(&self) -> &S {
        self.states.last().expect("at least the initial state")
    }

    /// Largest `|I(t) − I(t₀)|` for observer `j`.
    pub fn max_drift(&self, j: usize) -> f64 {
        let i0 = self.observations[0][j];
        self.observations.iter().map(|o| (o[j] - i0).abs()).fold(0.0, f64::max)
    }
}

/// Uniform steps from `t0` to `t1`. Errors are annotated with the index of
/// the failing step (1-based).
pub fn integrate<T: Stepper + ?Sized>(
    stepper: &T,
    y0: &T::State,
    t0: f64,
    t1: f64,
    nsteps: usize,
    observers: &[Observer<T::State>],
) -> Result<TrajectoryRecord<T::State>> {
    if nsteps == 0 {
        return Err(Error::domain("nsteps must be at least 1"));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 == t0 {
        return Err(Error::domain("integration interval must be finite and nonempty"));
    }
    let h = (t1 - t0) / nsteps as f64;
    let observe = |y: &T::State| observers.iter().map(|o| (o.eval)(y)).collect::<Vec<_>>();
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(nsteps + 1),
        states: Vec::with_capacity(nsteps + 1),
        observer_names: observers.iter().map(|o| o.name.clone()).collect(),
        observations: Vec::with_capacity(nsteps + 1),
        iterations: Vec::with_capacity(nsteps + 1),
    };
    rec.times.push(t0);
    rec.observations.push(observe(y0));
    rec.states.push(y0.clone());
    rec.iterations.push(0);
    let mut y = y0.clone();
    for i in 1..=nsteps {
        let out = stepper
            .step(&y, h)
            .map_err(|e| Error::AtStep { step: i, source: Box::new(e) })?;
        y = out.state;
        rec.times.push(if i == nsteps { t1 } else { t0 + i as f64 * h });
        rec.observations.push(observe(&y));
        rec.states.push(y.clone());
        rec.iterations.push(out.iterations);
    }
    Ok(rec)
}
