//! Matrix Lie algebras and groups: brackets, adjoints, exponentials, the
//! Cayley map and the differential of the exponential.
//!
//! The affine algebra is `aff(n) = gl(n) ⋉ ℝⁿ` with bracket
//! `[(ξ₁,c₁),(ξ₂,c₂)] = ([ξ₁,ξ₂], ξ₁c₂ − ξ₂c₁)`, which is the commutator of
//! the block matrices `[[ξ, c], [0, 0]]`.

mod algebra;
mod maps;
mod matfun;

pub use algebra::{
    hat, vee, AlgebraDescriptor, AlgebraElement, AlgebraKind, CoAlgebraElement, GroupElement, QuadraticForm,
    MEMBERSHIP_TOL,
};
pub use maps::{
    ad_power, ad_star, adjoint, bracket, cayley, co_adjoint, dcay, dcay_inv, dexp, dexp_so3, dexpinv,
    dexpinv_coefficient, dexpinv_so3, dexpinv_truncation_for_order, group_exp, group_log, rotation, so3,
    BERNOULLI_EVEN, DEXPINV_MAX_TRUNCATION,
};
pub use matfun::{expm, expm_minus_identity, logm, norm1, phi1, phi1_taylor, rodrigues};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use nalgebra::{DMatrix, DVector, Vector3};
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn sl3(entries: &[f64]) -> AlgebraElement {
        AlgebraElement::projected(AlgebraDescriptor::sl(3).unwrap(), &DMatrix::from_row_slice(3, 3, entries)).unwrap()
    }

    fn unit(a: AlgebraElement) -> AlgebraElement {
        let n = a.matrix().norm();
        a.scale(1.0 / n)
    }

    #[test]
    fn bernoulli_coefficients_are_exact() {
        assert_eq!(dexpinv_coefficient(1), Rational64::new(1, 12));
        assert_eq!(dexpinv_coefficient(2), Rational64::new(-1, 720));
        assert_eq!(dexpinv_coefficient(3), Rational64::new(1, 30240));
        assert_eq!(dexpinv_coefficient(5), Rational64::new(5, 66 * 3628800));
    }

    #[test]
    fn truncation_for_order() {
        assert_eq!(dexpinv_truncation_for_order(1), 0);
        assert_eq!(dexpinv_truncation_for_order(3), 1);
        assert_eq!(dexpinv_truncation_for_order(4), 2);
        assert_eq!(dexpinv_truncation_for_order(5), 2);
    }

    #[test]
    fn so3_bracket_is_cross_product() {
        let ex = so3(Vector3::x());
        let ey = so3(Vector3::y());
        let b = bracket(&ex, &ey).unwrap();
        assert!((b.so3_vector() - Vector3::z()).norm() < 1e-15);
        assert!(bracket(&ex, &ex).unwrap().matrix().amax() == 0.0);
        let a = so3(Vector3::new(0.3, -1.0, 2.0));
        let c = so3(Vector3::new(1.5, 0.2, -0.7));
        let s = bracket(&a, &c).unwrap() + bracket(&c, &a).unwrap();
        assert!(s.matrix().amax() < 1e-15);
    }

    #[test]
    fn bracket_rejects_mismatch() {
        let a = so3(Vector3::x());
        let b = AlgebraElement::zero(AlgebraDescriptor::sl(3).unwrap());
        assert!(matches!(bracket(&a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn construction_checks_membership() {
        let d = AlgebraDescriptor::so(3).unwrap();
        assert!(AlgebraElement::new(d.clone(), DMatrix::identity(3, 3)).is_err());
        assert!(AlgebraElement::new(d, hat(&Vector3::new(1.0, 2.0, 3.0))).is_ok());
        let sl = AlgebraDescriptor::sl(2).unwrap();
        assert!(AlgebraElement::new(sl, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0 + 1e-10])).is_err());
        assert!(AlgebraDescriptor::quadratic(DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn basis_is_orthonormal_and_coords_round_trip() {
        let j = DMatrix::from_row_slice(4, 4, &[0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.]);
        let descs = [
            AlgebraDescriptor::so3(),
            AlgebraDescriptor::so(4).unwrap(),
            AlgebraDescriptor::sl(3).unwrap(),
            AlgebraDescriptor::gl(2).unwrap(),
            AlgebraDescriptor::affine(2).unwrap(),
            AlgebraDescriptor::quadratic(j).unwrap(),
        ];
        let expected_dims = [3, 6, 8, 4, 6, 10];
        for (d, dim) in descs.iter().zip(expected_dims) {
            let b = d.basis();
            assert_eq!(b.len(), d.dim(), "{d}");
            assert_eq!(d.dim(), dim, "{d}");
            for (i, x) in b.iter().enumerate() {
                for (k, y) in b.iter().enumerate() {
                    let want = if i == k { 1.0 } else { 0.0 };
                    assert!((d.pairing(x, y) - want).abs() < 1e-12, "{d}");
                }
                assert!((d.project(x) - x).amax() < 1e-12, "{d}");
            }
            let c = DVector::from_fn(d.dim(), |i, _| (i as f64 * 0.7).cos());
            let m = d.from_coords(&c).unwrap();
            assert!((d.coords(&m) - c).amax() < 1e-12, "{d}");
        }
    }

    #[test]
    fn exp_examples() {
        let z = AlgebraElement::zero(AlgebraDescriptor::sl(3).unwrap());
        assert_eq!(group_exp(&z).unwrap().matrix(), &DMatrix::identity(3, 3));
        let a = so3(Vector3::z() * std::f64::consts::FRAC_PI_2);
        let r = group_exp(&a).unwrap();
        let x = r.matrix() * DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((x - DVector::from_vec(vec![0.0, 1.0, 0.0])).amax() < 1e-15);
        // Oracle: plain Taylor series to machine precision.
        let mut taylor = DMatrix::<f64>::identity(3, 3);
        let mut term = DMatrix::<f64>::identity(3, 3);
        for k in 1..40 {
            term = &term * a.matrix() / k as f64;
            taylor += &term;
        }
        assert!((r.matrix() - taylor).amax() < 1e-15);
        // Affine with L = 0.
        let b = DVector::from_vec(vec![1.0, -2.0]);
        let e = group_exp(&AlgebraElement::affine(&DMatrix::zeros(2, 2), &b).unwrap()).unwrap();
        let (ea, eb) = e.affine_parts().unwrap();
        assert_eq!(ea, DMatrix::identity(2, 2));
        assert!((eb - b).amax() < 1e-16);
    }

    #[test]
    fn affine_exp_uses_phi1() {
        let l = DMatrix::from_row_slice(2, 2, &[0.3, 1.0, -0.5, 0.2]);
        let b = DVector::from_vec(vec![0.7, -0.1]);
        let t = 0.8;
        let e = group_exp(&AlgebraElement::affine(&(&l * t), &(&b * t)).unwrap()).unwrap();
        let (ea, eb) = e.affine_parts().unwrap();
        assert!((ea - expm(&(&l * t)).unwrap()).amax() < 1e-14);
        assert!((eb - phi1(&(&l * t)).unwrap() * &b * t).amax() < 1e-14);
    }

    #[test]
    fn adjoint_examples() {
        let v = sl3(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, -0.2]);
        let id = GroupElement::identity(v.descriptor().clone());
        assert!((adjoint(&id, &v).unwrap().matrix() - v.matrix()).amax() < 1e-15);

        // so(3): coAd(R, m) = Rᵀm, derived from the defining property by a
        // 3×3 solve.
        let r = group_exp(&so3(Vector3::new(0.4, -0.9, 0.3))).unwrap();
        let m = Vector3::new(1.0, 2.0, -0.5);
        let mu = CoAlgebraElement::so3(m);
        let mut lhs = nalgebra::Matrix3::<f64>::zeros();
        let mut rhs = Vector3::zeros();
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = 1.0;
            let ad = adjoint(&r, &so3(e)).unwrap();
            lhs.set_row(k, &e.transpose());
            rhs[k] = mu.pairing(&ad).unwrap();
        }
        let solved = lhs.lu().solve(&rhs).unwrap();
        let got = co_adjoint(&r, &mu).unwrap().so3_vector();
        assert!((got - solved).norm() < 1e-14);
        let rt = nalgebra::Matrix3::from_column_slice(r.matrix().as_slice()).transpose();
        assert!((got - rt * m).norm() < 1e-14);
    }

    #[test]
    fn ad_star_examples() {
        let mu = CoAlgebraElement::so3(Vector3::new(0.3, 1.0, -2.0));
        let zero = so3(Vector3::zeros());
        assert!(ad_star(&zero, &mu).unwrap().matrix().amax() == 0.0);
        let xi = Vector3::new(-1.0, 0.5, 0.25);
        let got = ad_star(&so3(xi), &mu).unwrap().so3_vector();
        // Basis expansion of the defining property.
        let mut want = Vector3::zeros();
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = 1.0;
            want[k] = mu.pairing(&bracket(&so3(xi), &so3(e)).unwrap()).unwrap();
        }
        assert!((got - want).norm() < 1e-15);
        assert!((got - mu.so3_vector().cross(&xi)).norm() < 1e-15);
        assert!(ad_star(&so3(xi), &mu).unwrap().pairing(&so3(xi)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dexpinv_examples() {
        let w = sl3(&[0.1, -0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        let z = AlgebraElement::zero(w.descriptor().clone());
        assert!((dexpinv(&z, &w, 3).unwrap().matrix() - w.matrix()).amax() == 0.0);
        let u = w.scale(2.5);
        assert!((dexpinv(&u, &w, 5).unwrap().matrix() - w.matrix()).amax() < 1e-15);
        assert!(matches!(dexpinv(&u, &w, 6), Err(Error::Unsupported(_))));

        let u = unit(sl3(&[0.3, 1.0, -0.2, 0.5, -0.7, 0.4, 0.9, 0.1, 0.2])).scale(1e-2);
        let back = dexp(&u, &dexpinv(&u, &w, 3).unwrap(), 8).unwrap();
        assert!((back.matrix() - w.matrix()).amax() <= 1e-14 * w.matrix().amax());
    }

    #[test]
    fn dexp_examples() {
        let v = sl3(&[0.1, -0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        let u = sl3(&[0.0, 0.3, 0.1, -0.2, 0.2, 0.0, 0.4, -0.1, 0.1]);
        let z = AlgebraElement::zero(v.descriptor().clone());
        assert!((dexp(&z, &v, 10).unwrap().matrix() - v.matrix()).amax() == 0.0);
        let want = v.axpy(0.5, &bracket(&u, &v).unwrap());
        assert!((dexp(&u, &v, 1).unwrap().matrix() - want.matrix()).amax() < 1e-16);
        // Central differences of s ↦ exp(u + sv) exp(−u).
        let s = 1e-5;
        let emu = group_exp(&u.scale(-1.0)).unwrap();
        let plus = group_exp(&u.axpy(s, &v)).unwrap().mul(&emu).unwrap();
        let minus = group_exp(&u.axpy(-s, &v)).unwrap().mul(&emu).unwrap();
        let fd = (plus.matrix() - minus.matrix()) / (2.0 * s);
        assert!((fd - dexp(&u, &v, 12).unwrap().matrix()).amax() < 1e-8);
    }

    #[test]
    fn so3_closed_forms_match_series() {
        for scale in [1e-5, 1e-2, 0.3, 1.0] {
            let u = Vector3::new(0.6, -0.8, 0.3) * scale;
            let w = Vector3::new(1.0, 0.5, -2.0);
            let series = dexpinv(&so3(u), &so3(w), 5).unwrap().so3_vector();
            let closed = dexpinv_so3(&u, &w);
            let tol = if scale < 0.5 { 1e-13 } else { 1e-8 };
            assert!((series - closed).norm() < tol, "{scale}");
            let fwd = dexp(&so3(u), &so3(w), 30).unwrap().so3_vector();
            assert!((fwd - dexp_so3(&u, &w)).norm() < 1e-14);
            assert!((dexp_so3(&u, &dexpinv_so3(&u, &w)) - w).norm() < 1e-14);
        }
    }

    #[test]
    fn dexpinv_error_slope() {
        // dexpinv(u, dexp(u, v), m) − v = O(‖u‖^{2m+2}) since only even
        // powers are truncated.
        let u0 = unit(sl3(&[0.3, 1.0, -0.2, 0.5, -0.7, 0.4, 0.9, 0.1, 0.2]));
        let v = sl3(&[0.1, -0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        for m in 1..=3 {
            let err = |s: f64| {
                let u = u0.scale(s);
                let r = dexpinv(&u, &dexp(&u, &v, 2 * m + 2).unwrap(), m).unwrap();
                (r.matrix() - v.matrix()).norm()
            };
            let s = if m == 3 { 0.8 } else { 0.4 };
            let slope = (err(s) / err(s / 2.0)).log2();
            assert!((slope - (2 * m + 2) as f64).abs() < 0.3, "m={m} slope={slope}");
        }
    }

    #[test]
    fn cayley_examples() {
        let z = so3(Vector3::zeros());
        assert_eq!(cayley(&z).unwrap().matrix(), &DMatrix::identity(3, 3));
        let a = so3(Vector3::new(0.5, -1.2, 2.0));
        let c = cayley(&a).unwrap();
        assert!((c.matrix().transpose() * c.matrix() - DMatrix::identity(3, 3)).amax() < 1e-13);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let d = AlgebraDescriptor::quadratic(j.clone()).unwrap();
        let a = AlgebraElement::projected(d, &DMatrix::from_row_slice(2, 2, &[0.7, -0.3, 1.1, 0.2])).unwrap();
        let c = cayley(&a).unwrap();
        assert!((c.matrix().transpose() * &j * c.matrix() - &j).amax() < 1e-12);
        // dcay inverts dcay_inv.
        let v = AlgebraElement::projected(a.descriptor().clone(), &DMatrix::from_row_slice(2, 2, &[0.1, 0.4, -0.3, 0.5])).unwrap();
        let back = dcay(&a, &dcay_inv(&a, &v).unwrap()).unwrap();
        assert!((back.matrix() - v.matrix()).amax() < 1e-14);
        let gl = AlgebraDescriptor::gl(1).unwrap();
        let two = AlgebraElement::new(gl, DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!(matches!(cayley(&two), Err(Error::Numeric(_))));
    }

    #[test]
    fn log_round_trip_and_domain() {
        let w = Vector3::new(0.4, 1.1, -0.8);
        let l = group_log(&group_exp(&so3(w)).unwrap()).unwrap();
        assert!((l.so3_vector() - w).norm() < 1e-14);
        let tiny = Vector3::new(1e-7, -2e-7, 3e-8);
        let l = group_log(&group_exp(&so3(tiny)).unwrap()).unwrap();
        assert!((l.so3_vector() - tiny).norm() < 1e-20);
        let far = Vector3::z() * 3.1;
        assert!(matches!(group_log(&group_exp(&so3(far)).unwrap()), Err(Error::Chart(_))));
        let u = sl3(&[0.3, 1.0, -0.2, 0.5, -0.7, 0.4, 0.9, 0.1, 0.2]);
        let l = group_log(&group_exp(&u).unwrap()).unwrap();
        assert!((l.matrix() - u.matrix()).amax() < 1e-12);
    }

    #[test]
    fn group_membership() {
        let d = AlgebraDescriptor::sl(3).unwrap();
        let g = group_exp(&sl3(&[0.3, 1.0, -0.2, 0.5, -0.7, 0.4, 0.9, 0.1, 0.2])).unwrap();
        assert!(g.membership_defect() < 1e-13);
        assert!(GroupElement::new(d, DMatrix::zeros(3, 3)).is_err());
        let ga = GroupElement::affine(&DMatrix::identity(2, 2), &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let gi = ga.inverse().unwrap();
        assert!((ga.mul(&gi).unwrap().matrix() - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    fn vec3() -> impl Strategy<Value = Vector3<f64>> {
        prop::array::uniform3(-1.0..1.0f64).prop_map(|a| Vector3::new(a[0], a[1], a[2]))
    }

    fn mat3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0..1.0f64, 9)
    }

    proptest! {
        #[test]
        fn jacobi_identity(a in mat3(), b in mat3(), c in mat3(), x in vec3(), y in vec3(), z in vec3()) {
            let (a, b, c) = (unit(sl3(&a)), unit(sl3(&b)), unit(sl3(&c)));
            let j = bracket(&a, &bracket(&b, &c)?)? + bracket(&b, &bracket(&c, &a)?)? + bracket(&c, &bracket(&a, &b)?)?;
            prop_assert!(j.matrix().amax() <= 1e-12);
            prop_assume!(x.norm() > 1e-3 && y.norm() > 1e-3 && z.norm() > 1e-3);
            let (a, b, c) = (so3(x.normalize()), so3(y.normalize()), so3(z.normalize()));
            let j = bracket(&a, &bracket(&b, &c)?)? + bracket(&b, &bracket(&c, &a)?)? + bracket(&c, &bracket(&a, &b)?)?;
            prop_assert!(j.matrix().amax() <= 1e-12);
        }

        #[test]
        fn quadratic_exp_preserves_form(e in prop::collection::vec(-1.0..1.0f64, 16), s in 0.0..2.0f64) {
            let j = DMatrix::from_row_slice(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1., 0., 0., 0., 0., -1.]);
            let d = AlgebraDescriptor::quadratic(j.clone()).unwrap();
            let a = AlgebraElement::projected(d, &DMatrix::from_row_slice(4, 4, &e))?;
            prop_assume!(a.matrix().norm() > 1e-6);
            let a = a.scale(s / a.matrix().norm());
            let g = group_exp(&a)?;
            prop_assert!((g.matrix().transpose() * &j * g.matrix() - &j).amax() <= 1e-10);
            let c = cayley(&a)?;
            prop_assert!((c.matrix().transpose() * &j * c.matrix() - &j).amax() <= 1e-12);
        }

        #[test]
        fn rodrigues_matches_pade(w in vec3(), s in 0.0..10.0f64) {
            prop_assume!(w.norm() > 1e-9);
            let w = w.normalize() * s;
            let r = group_exp(&so3(w))?;
            let p = expm(&hat(&w))?;
            prop_assert!((r.matrix() - p).amax() <= 1e-13);
        }

        #[test]
        fn adjoint_of_exp_is_exp_of_ad(a in mat3(), b in mat3(), s in 0.0..1.0f64) {
            let u = unit(sl3(&a)).scale(s);
            let v = sl3(&b);
            let lhs = adjoint(&group_exp(&u)?, &v)?;
            let mut term = v.clone();
            let mut acc = v.clone();
            for k in 1..=20 {
                term = bracket(&u, &term)?.scale(1.0 / k as f64);
                acc = &acc + &term;
            }
            prop_assert!((lhs.matrix() - acc.matrix()).amax() <= 1e-10);
        }

        #[test]
        fn co_adjoint_is_dual(w in vec3(), m in vec3(), x in vec3()) {
            let g = group_exp(&so3(w * 2.0))?;
            let mu = CoAlgebraElement::so3(m);
            let xi = so3(x);
            let lhs = co_adjoint(&g, &mu)?.pairing(&xi)?;
            let rhs = mu.pairing(&adjoint(&g, &xi)?)?;
            prop_assert!((lhs - rhs).abs() <= 1e-14);
            prop_assert!((co_adjoint(&g, &mu)?.so3_vector().norm() - m.norm()).abs() <= 1e-14);
        }

        #[test]
        fn sl_co_adjoint_is_dual(e in mat3(), f in mat3(), x in mat3()) {
            let g = group_exp(&sl3(&e))?;
            let mu = sl3(&f).to_coalgebra();
            let xi = sl3(&x);
            let lhs = co_adjoint(&g, &mu)?.pairing(&xi)?;
            let rhs = mu.pairing(&adjoint(&g, &xi)?)?;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            let lhs = ad_star(&xi, &mu)?.pairing(&sl3(&e))?;
            let rhs = mu.pairing(&bracket(&xi, &sl3(&e))?)?;
            prop_assert!((lhs - rhs).abs() <= 1e-13);
        }
    }
}
