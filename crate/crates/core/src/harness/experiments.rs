use std::io::Write;

use crate::actions::ManifoldPoint;
use crate::error::{Error, Result};
use crate::integrators::{integrate, LieGroupMethod, LieGroupStepper, TrajectoryRecord};
use crate::lie_core::GroupElement;
use crate::structure::{symplecticity_check, TrivializedCotangentPoint};

use super::config::{steps_for, ExperimentConfig};
use super::methods::{build_cotangent_stepper, build_stepper};
use super::problems::{problem, ProblemDefinition};
use crate::integrators::CfScheme;

/// Ratio `h_min / h_ref` of the CF4 reference solution.
pub const REFERENCE_REFINEMENT: usize = 64;

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Usage(format!("cannot write CSV: {e}"))
}

/// The trajectory of one run.
pub fn run(cfg: &ExperimentConfig) -> Result<(ProblemDefinition, TrajectoryRecord<ManifoldPoint>)> {
    cfg.validate()?;
    let p = problem(&cfg.problem, &cfg.params)?;
    let h = cfg.step_sizes[0];
    let stepper = build_stepper(&cfg.method, &p, cfg.solver)?;
    let rec = integrate(stepper.as_ref(), &p.initial, 0.0, cfg.t_end, steps_for(h, cfg.t_end)?, &p.invariants)?;
    Ok((p, rec))
}

/// `t, x_0.., <invariants>.., iterations`, one row per step.
pub fn write_trajectory_csv<W: Write>(rec: &TrajectoryRecord<ManifoldPoint>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = rec.states[0].ambient_coords().len();
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend(rec.observer_names.iter().cloned());
    header.push("iterations".into());
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..rec.times.len() {
        let mut row = vec![format_float(rec.times[i])];
        row.extend(rec.states[i].ambient_coords().into_iter().map(format_float));
        row.extend(rec.observations[i].iter().copied().map(format_float));
        row.push(rec.iterations[i].to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Usage(format!("cannot write CSV: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub steps: usize,
    pub error: f64,
    /// `log₂`-ratio estimate against the previous row, scaled by the
    /// actual step ratio.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub problem: String,
    pub method: String,
    pub reference_h: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// The order estimate of the finest pair.
    pub fn final_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }
}

/// Errors at `t_end` against CF4 at `h_min / 64`, measured as the ambient
/// distance.
pub fn converge(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if cfg.step_sizes.len() < 3 {
        return Err(Error::Usage("a convergence study needs at least three step sizes".into()));
    }
    let p = problem(&cfg.problem, &cfg.params)?;
    let stepper = build_stepper(&cfg.method, &p, cfg.solver)?;
    let h_min = cfg.step_sizes.iter().copied().fold(f64::INFINITY, f64::min);
    let n_ref = steps_for(h_min, cfg.t_end)? * REFERENCE_REFINEMENT;
    let reference = LieGroupStepper::new(LieGroupMethod::CommutatorFree(CfScheme::cf4()), p.presentation.clone());
    let exact = integrate(&reference, &p.initial, 0.0, cfg.t_end, n_ref, &[])
        .map_err(|e| Error::numeric(format!("reference solution failed: {e}")))?;
    let exact = exact.final_state();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cfg.step_sizes.len());
    for &h in &cfg.step_sizes {
        let n = steps_for(h, cfg.t_end)?;
        let rec = integrate(stepper.as_ref(), &p.initial, 0.0, cfg.t_end, n, &[])?;
        let error = rec.final_state().distance(exact)?;
        let order = rows.last().map(|prev| (prev.error / error).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow { h, steps: n, error, order });
    }
    Ok(ConvergenceTable {
        problem: cfg.problem.clone(),
        method: cfg.method.clone(),
        reference_h: cfg.t_end / n_ref as f64,
        rows,
    })
}

pub fn write_convergence_csv<W: Write>(t: &ConvergenceTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "steps", "error", "order"]).map_err(csv_error)?;
    for r in &t.rows {
        w.write_record([format_float(r.h), r.steps.to_string(), format_float(r.error), r.order.map(format_float).unwrap_or_default()])
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Usage(format!("cannot write CSV: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftTable {
    pub invariant_names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[i][j]` is invariant `j` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    /// `max_i |I_j(t_i) − I_j(0)|`.
    pub max_drift: Vec<f64>,
}

impl DriftTable {
    pub fn drift_of(&self, name: &str) -> Option<f64> {
        self.invariant_names.iter().position(|n| n == name).map(|j| self.max_drift[j])
    }
}

/// Invariants along one run with the first step size.
pub fn drift(cfg: &ExperimentConfig) -> Result<DriftTable> {
    let p = problem(&cfg.problem, &cfg.params)?;
    if p.invariants.is_empty() {
        return Err(Error::unsupported(format!("{} has no registered invariants", p.name)));
    }
    let (_, rec) = run(cfg)?;
    let max_drift = (0..rec.observer_names.len()).map(|j| rec.max_drift(j)).collect();
    Ok(DriftTable {
        invariant_names: rec.observer_names,
        times: rec.times,
        values: rec.observations,
        iterations: rec.iterations,
        max_drift,
    })
}

/// Per-step rows followed by a `max_drift` summary row whose last field is
/// the largest iteration count.
pub fn write_drift_csv<W: Write>(t: &DriftTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(t.invariant_names.iter().cloned());
    header.push("iterations".into());
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..t.times.len() {
        let mut row = vec![format_float(t.times[i])];
        row.extend(t.values[i].iter().copied().map(format_float));
        row.push(t.iterations[i].to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    let mut row = vec!["max_drift".to_string()];
    row.extend(t.max_drift.iter().copied().map(format_float));
    row.push(t.iterations.iter().max().copied().unwrap_or(0).to_string());
    w.write_record(&row).map_err(csv_error)?;
    w.flush().map_err(|e| Error::Usage(format!("cannot write CSV: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticRow {
    pub h: f64,
    pub defect: f64,
}

/// Finite-difference symplecticity defect of a cotangent method at the
/// lifted initial state `(1, −m₀)`, one row per step size.
pub fn symplectic(cfg: &ExperimentConfig) -> Result<Vec<SymplecticRow>> {
    cfg.validate()?;
    let p = problem(&cfg.problem, &cfg.params)?;
    let ham = p
        .hamiltonian
        .clone()
        .ok_or_else(|| Error::unsupported(format!("{} has no Hamiltonian", p.name)))?;
    let m0 = match &p.initial {
        ManifoldPoint::Momentum(m) => m.clone(),
        _ => return Err(Error::unsupported(format!("{} is not a momentum problem", p.name))),
    };
    let desc = m0.descriptor().clone();
    let z = TrivializedCotangentPoint::new(GroupElement::identity(desc.clone()), -&m0)?;
    let stepper = build_cotangent_stepper(&cfg.method, ham, &desc, cfg.solver)?;
    cfg.step_sizes
        .iter()
        .map(|&h| Ok(SymplecticRow { h, defect: symplecticity_check(stepper.as_ref(), &z, h)? }))
        .collect()
}

pub fn write_symplectic_csv<W: Write>(rows: &[SymplecticRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "defect"]).map_err(csv_error)?;
    for r in rows {
        w.write_record([format_float(r.h), format_float(r.defect)]).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Usage(format!("cannot write CSV: {e}")))
}
