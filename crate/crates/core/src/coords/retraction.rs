//! Retractions on the unit sphere.

use nalgebra::DVector;

use crate::actions::ManifoldPoint;
use crate::error::{Error, Result};

/// Tolerance for tangency of input vectors.
pub const TANGENT_TOL: f64 = 1e-12;

/// An embedded manifold with an orthogonal-projector retraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddedManifold {
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RetractionKind {
    /// `φ_x(v) = (x + v)/‖x + v‖`, defined on the cone `(x, y) > 0`.
    SphereProjective,
    /// `φ_x(v) = x + v + n_x(v)` with the normal correction `n_x(v) ∈ N_xM`;
    /// on the sphere `φ_x(v) = √(1 − ‖v‖²) x + v` for `‖v‖ < 1`.
    EmbeddedProjector(EmbeddedManifold),
}

/// A retraction centred at a base point.
#[derive(Clone, Debug)]
pub struct RetractionChart {
    kind: RetractionKind,
    base: DVector<f64>,
}

fn check_finite(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::numeric("non-finite vector"))
    }
}

impl RetractionChart {
    pub fn new(kind: RetractionKind, base: &ManifoldPoint) -> Result<Self> {
        Ok(Self { kind, base: base.as_sphere()?.clone() })
    }

    /// Chart centred at a raw unit vector.
    pub fn at(kind: RetractionKind, base: &DVector<f64>) -> Result<Self> {
        Self::new(kind, &ManifoldPoint::sphere(base.clone())?)
    }

    pub fn base(&self) -> &DVector<f64> {
        &self.base
    }

    pub fn kind(&self) -> RetractionKind {
        self.kind
    }

    fn check_tangent(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.base.len() {
            return Err(Error::domain("tangent vector has the wrong dimension"));
        }
        check_finite(v)?;
        if self.base.dot(v).abs() > TANGENT_TOL * v.norm().max(1.0) {
            return Err(Error::domain("vector is not tangent at the base point"));
        }
        Ok(())
    }

    /// Orthogonal projection onto `T_xM`.
    pub fn project(&self, w: &DVector<f64>) -> DVector<f64> {
        w - &self.base * self.base.dot(w)
    }

    /// `φ_x(v)` as a raw vector.
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_tangent(v)?;
        match self.kind {
            RetractionKind::SphereProjective => {
                let p = &self.base + v;
                Ok(&p / p.norm())
            }
            RetractionKind::EmbeddedProjector(EmbeddedManifold::Sphere) => {
                let s = 1.0 - v.norm_squared();
                if s <= 0.0 {
                    return Err(Error::chart("tangent vector too long for the orthographic chart"));
                }
                let y = &self.base * s.sqrt() + v;
                Ok(&y / y.norm())
            }
        }
    }

    /// `φ_x⁻¹(y)` as a raw vector.
    pub fn apply_inverse(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.base.len() {
            return Err(Error::domain("point has the wrong dimension"));
        }
        check_finite(y)?;
        let xy = self.base.dot(y);
        if xy <= 0.0 {
            return Err(Error::chart(format!("point outside the chart cone: (x, y) = {xy:.3e}")));
        }
        match self.kind {
            RetractionKind::SphereProjective => Ok(y / xy - &self.base),
            RetractionKind::EmbeddedProjector(EmbeddedManifold::Sphere) => Ok(self.project(y)),
        }
    }

    /// `T_vφ_x(w)`.
    pub fn tangent_map(&self, v: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_tangent(v)?;
        match self.kind {
            RetractionKind::SphereProjective => {
                let p = &self.base + v;
                let r = p.norm();
                let q = &p / r;
                Ok((w - &q * q.dot(w)) / r)
            }
            RetractionKind::EmbeddedProjector(EmbeddedManifold::Sphere) => {
                let s = (1.0 - v.norm_squared()).sqrt();
                Ok(w - &self.base * (v.dot(w) / s))
            }
        }
    }

    /// Solves `T_vφ_x(w) = W` for `w ∈ T_xM`.
    pub fn tangent_solve(&self, v: &DVector<f64>, big_w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_tangent(v)?;
        check_finite(big_w)?;
        match self.kind {
            RetractionKind::SphereProjective => {
                let p = &self.base + v;
                let r = p.norm();
                let q = &p / r;
                let qx = q.dot(&self.base);
                Ok((big_w - &q * (self.base.dot(big_w) / qx)) * r)
            }
            RetractionKind::EmbeddedProjector(EmbeddedManifold::Sphere) => Ok(self.project(big_w)),
        }
    }
}

/// `φ_x(v)` as a sphere point.
pub fn retraction(chart: &RetractionChart, v: &DVector<f64>) -> Result<ManifoldPoint> {
    Ok(ManifoldPoint::Sphere(chart.apply(v)?))
}

/// `φ_x⁻¹(y)`.
pub fn retraction_inv(chart: &RetractionChart, y: &ManifoldPoint) -> Result<DVector<f64>> {
    chart.apply_inverse(y.as_sphere()?)
}

/// Inverse of the tangent map of the chart at `v`.
pub fn tangent_solve(chart: &RetractionChart, v: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    chart.tangent_solve(v, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KINDS: [RetractionKind; 2] =
        [RetractionKind::SphereProjective, RetractionKind::EmbeddedProjector(EmbeddedManifold::Sphere)];

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn examples() {
        let x = dv(&[1.0, 0.0, 0.0]);
        let c = RetractionChart::at(RetractionKind::SphereProjective, &x).unwrap();
        let y = c.apply(&dv(&[0.0, 1.0, 0.0])).unwrap();
        let s = 0.5f64.sqrt();
        assert!((y - dv(&[s, s, 0.0])).amax() < 1e-15);
        for k in KINDS {
            let c = RetractionChart::at(k, &x).unwrap();
            assert_eq!(c.apply(&dv(&[0.0, 0.0, 0.0])).unwrap(), x);
            assert!(matches!(c.apply_inverse(&dv(&[-1.0, 0.0, 0.0])), Err(Error::Chart(_))));
            assert!(matches!(c.apply(&dv(&[0.1, 0.0, 0.0])), Err(Error::Domain(_))));
        }
        let y = retraction(&c, &dv(&[0.0, 0.3, 0.1])).unwrap();
        assert!((retraction_inv(&c, &y).unwrap() - dv(&[0.0, 0.3, 0.1])).amax() < 1e-15);
    }

    #[test]
    fn tangent_map_at_zero_is_identity() {
        let x = dv(&[0.0, 0.6, 0.8]);
        let w = dv(&[1.0, 0.8, -0.6]);
        for k in KINDS {
            let c = RetractionChart::at(k, &x).unwrap();
            let t = 1e-6;
            let fd = (c.apply(&(&w * t)).unwrap() - c.apply(&(&w * -t)).unwrap()) / (2.0 * t);
            assert!((fd - &w).amax() < 1e-8);
        }
    }

    fn tangent_at(x: &DVector<f64>, raw: &DVector<f64>) -> DVector<f64> {
        raw - x * x.dot(raw)
    }

    proptest! {
        #[test]
        fn inverse_pair(p in prop::array::uniform3(-1.0..1.0f64), r in prop::array::uniform3(-1.0..1.0f64), scale in 0.0..0.99f64) {
            let x = dv(&p);
            prop_assume!(x.norm() > 1e-2);
            let x = x.normalize();
            let v = tangent_at(&x, &dv(&r));
            prop_assume!(v.norm() > 1e-6);
            let v = &v * (scale / v.norm());
            for k in KINDS {
                let c = RetractionChart::at(k, &x)?;
                let y = c.apply(&v)?;
                prop_assert!((y.norm() - 1.0).abs() <= 1e-15);
                prop_assert!((c.apply_inverse(&y)? - &v).amax() <= 1e-13);
            }
        }

        #[test]
        fn tangent_solve_inverts_tangent_map(p in prop::array::uniform3(-1.0..1.0f64), r in prop::array::uniform3(-1.0..1.0f64), q in prop::array::uniform3(-1.0..1.0f64)) {
            let x = dv(&p);
            prop_assume!(x.norm() > 1e-2);
            let x = x.normalize();
            let v = &tangent_at(&x, &dv(&r)) * 0.5;
            let w = tangent_at(&x, &dv(&q));
            for k in KINDS {
                let c = RetractionChart::at(k, &x)?;
                let big = c.tangent_map(&v, &w)?;
                prop_assert!((c.tangent_solve(&v, &big)? - &w).amax() <= 1e-12);
                // Tangent map against central differences.
                let t = 1e-6;
                let fd = (c.apply(&(&v + &w * t))? - c.apply(&(&v - &w * t))?) / (2.0 * t);
                prop_assert!((fd - big).amax() <= 1e-7);
            }
        }
    }
}
