//! Problem registry, experiment drivers and CSV output.

mod config;
mod experiments;
mod methods;
mod problems;

pub use config::{halvings, parse_config, steps_for, ExperimentConfig};
pub use experiments::{
    converge, drift, format_float, run, symplectic, write_convergence_csv, write_drift_csv, write_symplectic_csv,
    write_trajectory_csv, ConvergenceRow, ConvergenceTable, DriftTable, SymplecticRow, REFERENCE_REFINEMENT,
};
pub use methods::{
    build_cotangent_stepper, build_stepper, lie_group_method, method_info, MethodFamily, MethodInfo,
    MomentumVariationalStepper, SphereDiscreteGradientStepper, AVF_NODES, COTANGENT_METHODS, METHODS,
    REFERENCE_SUBSTEPS,
};
pub use problems::{
    builtin_problems, dirichlet_laplacian, problem, ProblemDefinition, ProblemParams, SphereEnergy, ISOTROPY_AXIS,
    PROBLEM_NAMES,
};
