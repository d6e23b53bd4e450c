use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::structure::SolverConfig;

use super::problems::ProblemParams;

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// skipped; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Usage(format!("config line {}: empty key or value", i + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// One experiment: a problem, a method and a step-size schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub method: String,
    pub step_sizes: Vec<f64>,
    pub t_end: f64,
    pub params: ProblemParams,
    pub solver: SolverConfig,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "rigid_body_sphere".into(),
            method: "cf4".into(),
            step_sizes: vec![0.1],
            t_end: 1.0,
            params: ProblemParams::default(),
            solver: SolverConfig::default(),
            output: None,
        }
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Usage(format!("{key}: `{v}` is not a number")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>().map_err(|_| Error::Usage(format!("{key}: `{v}` is not a nonnegative integer")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

fn triple(key: &str, v: &str) -> Result<[f64; 3]> {
    let xs = list(key, v)?;
    xs.try_into().map_err(|_| Error::Usage(format!("{key}: expected three comma-separated numbers")))
}

/// `h₀·2^{−k}` for `k = 0..=halvings`.
pub fn halvings(h0: f64, halvings: usize) -> Vec<f64> {
    (0..=halvings).map(|k| h0 / 2f64.powi(k as i32)).collect()
}

impl ExperimentConfig {
    /// Applies `key = value` settings. `h0` and `halvings` combine into a
    /// geometric schedule and override `h`.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        let mut h0 = None;
        let mut halv = None;
        for (k, v) in settings {
            match k.as_str() {
                "problem" => self.problem = v.clone(),
                "method" => self.method = v.clone(),
                "h" => self.step_sizes = list(k, v)?,
                "h0" => h0 = Some(number(k, v)?),
                "halvings" => halv = Some(count(k, v)?),
                "t_end" | "T" => self.t_end = number(k, v)?,
                "inertia" => self.params.inertia = triple(k, v)?,
                "initial" => self.params.initial = triple(k, v)?,
                "alpha" => self.params.alpha = number(k, v)?,
                "grid" => self.params.grid = count(k, v)?,
                "tolerance" => self.solver.tolerance = number(k, v)?,
                "max_iterations" => self.solver.max_iterations = count(k, v)?,
                "output" => self.output = Some(PathBuf::from(v)),
                _ => return Err(Error::Usage(format!("unknown config key `{k}`"))),
            }
        }
        match (h0, halv) {
            (Some(h), Some(n)) => self.step_sizes = halvings(h, n),
            (None, None) => {}
            _ => return Err(Error::Usage("h0 and halvings must be given together".into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_sizes.is_empty() || !self.step_sizes.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(Error::Usage("step sizes must be positive".into()));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Usage("t_end must be positive".into()));
        }
        self.params.validate()?;
        self.solver.validate()
    }
}

/// Number of steps of size `h` covering `[0, t_end]`. Rejects sizes that
/// do not divide the horizon.
pub fn steps_for(h: f64, t_end: f64) -> Result<usize> {
    let n = (t_end / h).round();
    if n < 1.0 || ((n * h - t_end) / t_end).abs() > 1e-9 {
        return Err(Error::Usage(format!("step size {h} does not divide t_end = {t_end}")));
    }
    Ok(n as usize)
}
