use std::sync::Arc;

use crate::actions::ManifoldPoint;
use crate::coords::{CoordinateMap, RetractionKind};
use crate::error::{Error, Result};
use crate::integrators::{ButcherTableau, CfScheme, LieGroupMethod, LieGroupStepper, StepOutcome, Stepper};
use crate::lie_core::{AlgebraDescriptor, GroupElement};
use crate::structure::{
    dg_step_retraction, CotangentLieEulerStepper, DiscreteGradientConfig, ReferenceFlowStepper, SolverConfig,
    TrivializedCotangentPoint, TrivializedHamiltonian, TrivializedSystem, VariationalStepper,
};

use super::problems::{ProblemDefinition, SphereEnergy};

/// What a method needs from a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodFamily {
    /// Any presented vector field.
    LieGroup,
    /// A sphere first integral and bivector.
    DiscreteGradient,
    /// A right-trivialized Hamiltonian.
    Variational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MethodInfo {
    pub name: &'static str,
    pub family: MethodFamily,
    pub order: Option<usize>,
    pub label: &'static str,
}

const fn info(name: &'static str, family: MethodFamily, order: usize, label: &'static str) -> MethodInfo {
    MethodInfo { name, family, order: Some(order), label }
}

/// The registered methods.
pub const METHODS: [MethodInfo; 10] = [
    info("lie_euler", MethodFamily::LieGroup, 1, "explicit"),
    info("cg3", MethodFamily::LieGroup, 3, "explicit commutator-free"),
    info("cf4", MethodFamily::LieGroup, 4, "explicit commutator-free"),
    info("rkmk4", MethodFamily::LieGroup, 4, "explicit RKMK, exponential coordinates"),
    info("rkmk4_min", MethodFamily::LieGroup, 4, "explicit RKMK, minimal commutators"),
    info("rkmk4_cayley", MethodFamily::LieGroup, 4, "explicit RKMK, Cayley coordinates"),
    info("dg_gonzalez", MethodFamily::DiscreteGradient, 2, "energy-preserving"),
    info("dg_avf", MethodFamily::DiscreteGradient, 2, "approximate-AVF"),
    info("variational", MethodFamily::Variational, 2, "symplectic, exponential coordinates"),
    info("variational_cayley", MethodFamily::Variational, 2, "symplectic, Cayley coordinates"),
];

/// Quadrature nodes used by `dg_avf`.
pub const AVF_NODES: usize = 3;

pub fn method_info(name: &str) -> Result<MethodInfo> {
    METHODS
        .iter()
        .find(|m| m.name == name)
        .copied()
        .ok_or_else(|| Error::Lookup { kind: "method", name: name.to_string() })
}

pub fn lie_group_method(name: &str, problem: &ProblemDefinition) -> Result<LieGroupMethod> {
    let desc = problem.presentation.descriptor();
    Ok(match name {
        "lie_euler" => LieGroupMethod::LieEuler,
        "cg3" => LieGroupMethod::CommutatorFree(CfScheme::cg3()),
        "cf4" => LieGroupMethod::CommutatorFree(CfScheme::cf4()),
        "rkmk4" => LieGroupMethod::rkmk_exp(ButcherTableau::rk4(), &problem.presentation)?,
        "rkmk4_min" => LieGroupMethod::Rkmk4Minimal,
        "rkmk4_cayley" => LieGroupMethod::Rkmk { tableau: ButcherTableau::rk4(), map: CoordinateMap::cayley(desc.clone())? },
        _ => {
            method_info(name)?;
            return Err(Error::unsupported(format!("{name} is not a Lie group method")));
        }
    })
}

/// Gonzalez or AVF discrete gradient on the sphere in the projective chart.
#[derive(Clone)]
pub struct SphereDiscreteGradientStepper {
    pub config: DiscreteGradientConfig,
    pub energy: SphereEnergy,
    pub chart: RetractionKind,
}

impl Stepper for SphereDiscreteGradientStepper {
    type State = ManifoldPoint;

    fn step(&self, y: &ManifoldPoint, h: f64) -> Result<StepOutcome<ManifoldPoint>> {
        dg_step_retraction(&self.config, &self.energy.integral, &self.energy.bivector, self.chart, y, h)
    }

    fn name(&self) -> String {
        match self.config.kind {
            crate::structure::DiscreteGradientKind::GonzalezMidpoint => "dg_gonzalez".into(),
            crate::structure::DiscreteGradientKind::AvfQuadrature { .. } => "dg_avf".into(),
        }
    }
}

/// The variational integrator driven through a Lie–Poisson state `m`. The
/// Hamiltonian must not depend on `g`; the momentum is lifted to `(1, −m)`
/// and the group part of the result is dropped.
#[derive(Clone)]
pub struct MomentumVariationalStepper {
    pub inner: VariationalStepper,
}

impl Stepper for MomentumVariationalStepper {
    type State = ManifoldPoint;

    fn step(&self, y: &ManifoldPoint, h: f64) -> Result<StepOutcome<ManifoldPoint>> {
        let m = match y {
            ManifoldPoint::Momentum(m) => m,
            other => return Err(Error::domain(format!("expected a momentum, got a {} point", other.variant_name()))),
        };
        let z = TrivializedCotangentPoint::new(GroupElement::identity(m.descriptor().clone()), -m)?;
        let out = self.inner.step(&z, h)?;
        Ok(StepOutcome { state: ManifoldPoint::Momentum(-&out.state.mu), iterations: out.iterations })
    }

    fn name(&self) -> String {
        self.inner.name()
    }
}

fn variational_map(name: &str, desc: &AlgebraDescriptor) -> Result<CoordinateMap> {
    match name {
        "variational" => CoordinateMap::exp(desc.clone(), 3),
        "variational_cayley" => CoordinateMap::cayley(desc.clone()),
        _ => Err(Error::Lookup { kind: "variational method", name: name.to_string() }),
    }
}

/// A stepper on the problem's own state space.
pub fn build_stepper(name: &str, problem: &ProblemDefinition, solver: SolverConfig) -> Result<Box<dyn Stepper<State = ManifoldPoint>>> {
    let info = method_info(name)?;
    match info.family {
        MethodFamily::LieGroup => {
            Ok(Box::new(LieGroupStepper::new(lie_group_method(name, problem)?, problem.presentation.clone())))
        }
        MethodFamily::DiscreteGradient => {
            let energy = problem
                .sphere_energy
                .clone()
                .ok_or_else(|| Error::unsupported(format!("{name} needs a sphere first integral; {} has none", problem.name)))?;
            let mut config =
                if name == "dg_avf" { DiscreteGradientConfig::avf(AVF_NODES) } else { DiscreteGradientConfig::gonzalez() };
            config.solver = solver;
            Ok(Box::new(SphereDiscreteGradientStepper { config, energy, chart: RetractionKind::SphereProjective }))
        }
        MethodFamily::Variational => {
            let ham = problem
                .hamiltonian
                .clone()
                .ok_or_else(|| Error::unsupported(format!("{name} needs a Hamiltonian; {} has none", problem.name)))?;
            let tau = variational_map(name, problem.presentation.descriptor())?;
            Ok(Box::new(MomentumVariationalStepper { inner: VariationalStepper { system: ham, tau, solver } }))
        }
    }
}

/// Names accepted by [`build_cotangent_stepper`].
pub const COTANGENT_METHODS: [&str; 4] = ["variational", "variational_cayley", "cotangent_lie_euler", "reference"];

/// Substeps per call of the `reference` cotangent stepper.
pub const REFERENCE_SUBSTEPS: usize = 200;

/// A stepper on `G ⋉ 𝔤*` for the symplecticity experiment.
pub fn build_cotangent_stepper(
    name: &str,
    ham: Arc<TrivializedHamiltonian>,
    desc: &AlgebraDescriptor,
    solver: SolverConfig,
) -> Result<Box<dyn Stepper<State = TrivializedCotangentPoint>>> {
    let system: Arc<dyn TrivializedSystem> = ham;
    match name {
        "variational" | "variational_cayley" => {
            let tau = variational_map(name, desc)?;
            Ok(Box::new(VariationalStepper { system, tau, solver }))
        }
        "cotangent_lie_euler" => Ok(Box::new(CotangentLieEulerStepper { system })),
        "reference" => Ok(Box::new(ReferenceFlowStepper { system, substeps: REFERENCE_SUBSTEPS })),
        _ => Err(Error::Lookup { kind: "cotangent method", name: name.to_string() }),
    }
}
