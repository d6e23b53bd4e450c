//! Structure-preserving schemes: the variational integrator on the
//! right-trivialized cotangent bundle and discrete-gradient methods on Lie
//! groups and on the sphere.

mod cotangent;
mod discrete_gradient;
mod variational;

pub use cotangent::{
    symplectic_form, symplectic_matrix, CotangentScalar, CotangentToAlgebra, CotangentToDual, TangentScalar, TangentToDual,
    TrivializedCotangentPoint, TrivializedHamiltonian, TrivializedLagrangian, TrivializedSystem,
};
pub use discrete_gradient::{
    bivector_from_gradient, dg_step_group, dg_step_retraction, discrete_differential, discrete_differential_retraction,
    gauss_legendre, sphere_midpoint, sphere_rigid_body_discrete_gradient, AmbientScalar, AmbientVectorField, Bivector,
    DiscreteGradientConfig, DiscreteGradientKind, GroupFirstIntegral, ManifoldFirstIntegral, MidpointRule,
    TrivializedBivector,
};
pub use variational::{
    cotangent_lie_euler_step, dtau_star, reference_flow, symplecticity_check, variational_step, CotangentLieEulerStepper,
    ReferenceFlowStepper, SolverConfig, VariationalStepper, SYMPLECTIC_FD_STEP,
};
