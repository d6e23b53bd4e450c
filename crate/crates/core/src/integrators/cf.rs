use num_rational::Rational64;
use num_traits::Zero;

use super::tableau::{r2f, rat, ButcherTableau};
use crate::actions::{act, FieldPresentation, ManifoldPoint};
use crate::error::{Error, Result};
use crate::lie_core::{group_exp, AlgebraElement};

/// One stage (or the update) of a commutator-free scheme: a product of
/// exponentials of frozen combinations `Σₖ αᵏ F_k`.
///
/// `exponentials[0]` acts first. With `reuse = Some(k)` the stage starts
/// from the value of stage `k` instead of `y₀`; the first groups of this
/// stage must then repeat the groups of stage `k` exactly, and they are not
/// recomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct CfStage {
    pub exponentials: Vec<Vec<Rational64>>,
    pub reuse: Option<usize>,
}

impl CfStage {
    pub fn new(exponentials: Vec<Vec<Rational64>>) -> Self {
        Self { exponentials, reuse: None }
    }

    pub fn reusing(stage: usize, exponentials: Vec<Vec<Rational64>>) -> Self {
        Self { exponentials, reuse: Some(stage) }
    }

    /// Classical coefficients `Σⱼ αⱼᵏ`.
    pub fn classical(&self, s: usize) -> Vec<Rational64> {
        let mut out = vec![Rational64::zero(); s];
        for g in &self.exponentials {
            for (o, a) in out.iter_mut().zip(g) {
                *o += *a;
            }
        }
        out
    }
}

/// A commutator-free Lie group method. Crouch–Grossman methods are the
/// special case of one frozen field per exponential.
#[derive(Clone, Debug, PartialEq)]
pub struct CfScheme {
    name: String,
    stages: Vec<CfStage>,
    update: CfStage,
    order: Option<usize>,
}

impl CfScheme {
    /// Validates explicitness, shapes, reuse annotations and consistency.
    pub fn new(name: &str, stages: Vec<CfStage>, update: CfStage, order: Option<usize>) -> Result<Self> {
        let s = stages.len();
        if s == 0 {
            return Err(Error::scheme("scheme needs at least one stage"));
        }
        let check = |r: usize, stage: &CfStage, what: &str| -> Result<()> {
            for g in &stage.exponentials {
                if g.len() != s {
                    return Err(Error::scheme(format!("{what}: coefficient group of length {} for {s} stages", g.len())));
                }
                if let Some(k) = (r..s).find(|&k| !g[k].is_zero()) {
                    return Err(Error::scheme(format!(
                        "{what}: coefficient on F{} references a stage not yet computed",
                        k + 1
                    )));
                }
            }
            if let Some(k) = stage.reuse {
                if k >= r {
                    return Err(Error::scheme(format!("{what}: reuses stage {} which is not earlier", k + 1)));
                }
                let prefix = &stages[k].exponentials;
                if stage.exponentials.len() < prefix.len() || stage.exponentials[..prefix.len()] != prefix[..] {
                    return Err(Error::scheme(format!(
                        "{what}: reuse of stage {} does not repeat its exponentials",
                        k + 1
                    )));
                }
            }
            Ok(())
        };
        for (r, st) in stages.iter().enumerate() {
            check(r, st, &format!("stage {}", r + 1))?;
        }
        check(s, &update, "update")?;
        let sum: Rational64 = update.classical(s).iter().sum();
        if sum != rat(1, 1) {
            return Err(Error::scheme(format!("update coefficients sum to {sum}, not 1")));
        }
        Ok(Self { name: name.to_string(), stages, update, order })
    }

    /// Embeds a Runge–Kutta tableau as a Crouch–Grossman method: stage `r`
    /// applies `exp(h a_{r,1} F₁)` first and `exp(h a_{r,r−1} F_{r−1})` last.
    pub fn crouch_grossman(name: &str, tab: &ButcherTableau) -> Result<Self> {
        if !tab.is_explicit() {
            return Err(Error::unsupported("Crouch–Grossman methods need an explicit tableau"));
        }
        let s = tab.stages();
        let single = |k: usize, a: Rational64| {
            let mut g = vec![Rational64::zero(); s];
            g[k] = a;
            g
        };
        let stages = (0..s)
            .map(|r| CfStage::new((0..r).filter(|&k| !tab.a(r, k).is_zero()).map(|k| single(k, tab.a(r, k))).collect()))
            .collect();
        let update = CfStage::new((0..s).filter(|&k| !tab.b(k).is_zero()).map(|k| single(k, tab.b(k))).collect());
        Self::new(name, stages, update, tab.order().filter(|&p| p <= 2))
    }

    /// A Runge–Kutta tableau with one exponential per stage. The classical
    /// order survives only up to 2 on non-commutative problems.
    pub fn single_exponential(name: &str, tab: &ButcherTableau) -> Result<Self> {
        let s = tab.stages();
        let stages = (0..s)
            .map(|r| {
                let g: Vec<Rational64> = (0..s).map(|k| tab.a(r, k)).collect();
                CfStage::new(if g.iter().all(|x| x.is_zero()) { vec![] } else { vec![g] })
            })
            .collect();
        let update = CfStage::new(vec![(0..s).map(|k| tab.b(k)).collect()]);
        Self::new(name, stages, update, tab.order().map(|p| p.min(2)))
    }

    pub fn lie_euler() -> Self {
        Self::new("lie_euler", vec![CfStage::new(vec![])], CfStage::new(vec![vec![rat(1, 1)]]), Some(1)).expect("valid")
    }

    /// The third-order, three-stage Crouch–Grossman method.
    pub fn cg3() -> Self {
        let z = Rational64::zero();
        let tab = ButcherTableau::new(
            "cg3",
            vec![vec![z, z, z], vec![rat(3, 4), z, z], vec![rat(119, 216), rat(17, 108), z]],
            vec![rat(13, 51), rat(-2, 3), rat(24, 17)],
            Some(3),
        )
        .expect("valid");
        let mut s = Self::crouch_grossman("cg3", &tab).expect("valid");
        s.order = Some(3);
        s
    }

    /// The fourth-order commutator-free method whose fourth stage starts
    /// from the second.
    pub fn cf4() -> Self {
        let z = Rational64::zero();
        let h = rat(1, 2);
        let stages = vec![
            CfStage::new(vec![]),
            CfStage::new(vec![vec![h, z, z, z]]),
            CfStage::new(vec![vec![z, h, z, z]]),
            CfStage::reusing(1, vec![vec![h, z, z, z], vec![-h, z, rat(1, 1), z]]),
        ];
        let update = CfStage::new(vec![
            vec![rat(3, 12), rat(2, 12), rat(2, 12), rat(-1, 12)],
            vec![rat(-1, 12), rat(2, 12), rat(2, 12), rat(3, 12)],
        ]);
        Self::new("cf4", stages, update, Some(4)).expect("valid")
    }

    /// Skips validation; used to perturb coefficients off the consistent set.
    pub(crate) fn from_parts_unchecked(name: String, stages: Vec<CfStage>, update: CfStage) -> Self {
        Self { name, stages, update, order: None }
    }

    /// The same scheme with all reuse annotations removed.
    pub fn without_reuse(&self) -> Self {
        let strip = |s: &CfStage| CfStage::new(s.exponentials.clone());
        Self {
            name: format!("{}-noreuse", self.name),
            stages: self.stages.iter().map(strip).collect(),
            update: strip(&self.update),
            order: self.order,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> &[CfStage] {
        &self.stages
    }

    pub fn update(&self) -> &CfStage {
        &self.update
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    /// Classical projection `aᵣᵏ = Σⱼ α_{r,j}ᵏ`, `bᵏ = Σⱼ βⱼᵏ`.
    pub fn classical_tableau(&self) -> ButcherTableau {
        let s = self.stage_count();
        ButcherTableau::new(
            &format!("{}-classical", self.name),
            self.stages.iter().map(|st| st.classical(s)).collect(),
            self.update.classical(s),
            None,
        )
        .expect("validated at construction")
    }

    /// Exponentials evaluated per step, honouring reuse.
    pub fn exponential_count(&self) -> usize {
        let count = |st: &CfStage| {
            let skip = st.reuse.map_or(0, |k| self.stages[k].exponentials.len());
            st.exponentials[skip..].iter().filter(|g| g.iter().any(|a| !a.is_zero())).count()
        };
        self.stages.iter().map(count).sum::<usize>() + count(&self.update)
    }
}

fn apply_stage(
    stage: &CfStage,
    stages: &[CfStage],
    values: &[ManifoldPoint],
    fields: &[AlgebraElement],
    pres: &FieldPresentation,
    y0: &ManifoldPoint,
    h: f64,
    exps: &mut usize,
) -> Result<ManifoldPoint> {
    let (mut y, skip) = match stage.reuse {
        Some(k) => (values[k].clone(), stages[k].exponentials.len()),
        None => (y0.clone(), 0),
    };
    for g in &stage.exponentials[skip..] {
        let mut xi = AlgebraElement::zero(pres.descriptor().clone());
        let mut any = false;
        for (k, a) in g.iter().enumerate() {
            if !a.is_zero() {
                xi = xi.axpy(h * r2f(*a), &fields[k]);
                any = true;
            }
        }
        if any {
            y = act(pres.action(), &group_exp(&xi)?, &y)?;
            *exps += 1;
        }
    }
    Ok(y)
}

/// One step of a commutator-free scheme. Returns the new point and the
/// number of exponentials evaluated.
pub fn cf_step_counted(scheme: &CfScheme, pres: &FieldPresentation, y0: &ManifoldPoint, h: f64) -> Result<(ManifoldPoint, usize)> {
    let mut values: Vec<ManifoldPoint> = Vec::with_capacity(scheme.stage_count());
    let mut fields: Vec<AlgebraElement> = Vec::with_capacity(scheme.stage_count());
    let mut exps = 0;
    for stage in &scheme.stages {
        let y = apply_stage(stage, &scheme.stages, &values, &fields, pres, y0, h, &mut exps)?;
        fields.push(pres.eval(&y)?);
        values.push(y);
    }
    let y1 = apply_stage(&scheme.update, &scheme.stages, &values, &fields, pres, y0, h, &mut exps)?;
    Ok((y1, exps))
}

/// One step of a commutator-free (or Crouch–Grossman) scheme.
pub fn cf_step(scheme: &CfScheme, pres: &FieldPresentation, y0: &ManifoldPoint, h: f64) -> Result<ManifoldPoint> {
    cf_step_counted(scheme, pres, y0, h).map(|(y, _)| y)
}
