//! Dense matrix functions: exponential, logarithm and φ₁.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};

// Coefficients of the degree-(6,6) Padé approximant of exp.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::numeric(format!("{what}: non-finite entries")))
    }
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a (6,6) Padé approximant,
/// scaled so that `‖a / 2ˢ‖₁ ≤ 0.5`.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    Ok(expm_minus_identity(a)? + DMatrix::identity(n, n))
}

/// `eᵃ − I` without the cancellation of forming `eᵃ` first.
///
/// The Padé quotient gives `eᵃ − I = D⁻¹(N − D)` where `N − D` holds only
/// odd powers, and squaring uses `e²ᵃ − I = E(E + 2I)`.
pub fn expm_minus_identity(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(a, "expm input")?;
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = a / 2f64.powi(s);
    let id = DMatrix::<f64>::identity(n, n);
    let mut den = &id * PADE6[0];
    let mut odd = DMatrix::<f64>::zeros(n, n);
    let mut pow = id.clone();
    for (k, c) in PADE6.iter().enumerate().skip(1) {
        pow = &pow * &a;
        if k % 2 == 0 {
            den += &pow * *c;
        } else {
            den -= &pow * *c;
            odd += &pow * (2.0 * c);
        }
    }
    let mut e = den
        .lu()
        .solve(&odd)
        .ok_or_else(|| Error::numeric("singular Padé denominator"))?;
    for _ in 0..s {
        let e2 = &e + &id * 2.0;
        e = &e * e2;
    }
    check_finite(&e, "expm")?;
    Ok(e)
}

/// `exp(hat(w))` by the Rodrigues formula.
pub fn rodrigues(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        // sinθ/θ and (1−cosθ)/θ² to O(θ⁶)
        (1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0, 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = w.cross_matrix();
    Matrix3::identity() + k * a + k * k * b
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrtm(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let mut y = x.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or_else(|| Error::chart("matrix logarithm: singular iterate"))?;
        let zi = z.clone().try_inverse().ok_or_else(|| Error::chart("matrix logarithm: singular iterate"))?;
        let y1 = (&y + zi) * 0.5;
        let z1 = (&z + yi) * 0.5;
        let delta = (&y1 - &y).amax();
        y = y1;
        z = z1;
        if !y.iter().all(|v| v.is_finite()) {
            break;
        }
        if delta <= 1e-15 * y.amax().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::chart("matrix logarithm: square root iteration failed (no principal logarithm?)"))
}

/// Principal matrix logarithm by inverse scaling and squaring.
pub fn logm(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(g, "logm input")?;
    let n = g.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut x = g.clone();
    let mut k = 0;
    while norm1(&(&x - &id)) > 0.25 {
        if k >= 40 {
            return Err(Error::chart("matrix logarithm: outside principal domain"));
        }
        x = sqrtm(&x)?;
        k += 1;
    }
    // log X = 2 atanh(Z), Z = (X − I)(X + I)⁻¹, ‖Z‖ ≲ 1/7
    let z = (&x + &id)
        .transpose()
        .lu()
        .solve(&(&x - &id).transpose())
        .ok_or_else(|| Error::numeric("logm: singular X + I"))?
        .transpose();
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut acc = z.clone();
    for j in 1..60 {
        term = &term * &z2;
        let t = &term / (2 * j + 1) as f64;
        acc += &t;
        if t.amax() <= 1e-18 * acc.amax().max(1e-300) {
            break;
        }
    }
    let r = acc * (2.0 * 2f64.powi(k));
    check_finite(&r, "logm")?;
    Ok(r)
}

/// `φ₁(Z) = Σ Zᵏ/(k+1)!`.
///
/// Solves `Z φ₁(Z) = eᶻ − I` when the smallest singular value of `Z` is at
/// least `1e-4‖Z‖`; otherwise sums 18 Taylor terms when `‖Z‖₁ ≤ 1`, and for
/// larger nearly singular `Z` reads φ₁ off the exponential of the block
/// matrix `[[Z, I], [0, 0]]`.
pub fn phi1(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(z, "phi1 input")?;
    let n = z.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let nrm = z.norm();
    if nrm == 0.0 {
        return Ok(id);
    }
    let sv = z.clone().svd(false, false).singular_values;
    if sv.min() >= 1e-4 * nrm {
        let e = expm_minus_identity(z)?;
        return z
            .clone()
            .lu()
            .solve(&e)
            .ok_or_else(|| Error::numeric("phi1: singular solve"));
    }
    if norm1(z) <= 1.0 {
        return Ok(phi1_taylor(z, 18));
    }
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(z);
    big.view_mut((0, n), (n, n)).copy_from(&id);
    let e = expm(&big)?;
    Ok(e.view((0, n), (n, n)).into_owned())
}

/// Truncated Taylor series `Σ_{k<terms} Zᵏ/(k+1)!`.
pub fn phi1_taylor(z: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = z.nrows();
    let mut acc = DMatrix::zeros(n, n);
    // Horner: φ₁ = I/1! + Z(I/2! + Z(I/3! + ...))
    for k in (0..terms).rev() {
        acc = DMatrix::identity(n, n) + z * acc / (k + 2) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn taylor_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
        // Plain Taylor with scaling, as an independent oracle.
        let n = a.nrows();
        let s = 8;
        let b = a / 2f64.powi(s);
        let mut acc = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..30 {
            term = &term * &b / k as f64;
            acc += &term;
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn expm_matches_taylor() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, 2.0, -0.3, 0.4, -1.5, 0.6, 0.7, 0.8, 0.2]);
        let d = (expm(&a).unwrap() - taylor_exp(&a)).amax();
        assert!(d < 1e-13, "{d}");
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::zeros(4, 4);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn expm_rejects_nan() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(expm(&a), Err(Error::Numeric(_))));
    }

    #[test]
    fn rodrigues_agrees_with_pade() {
        for w in [Vector3::new(0.3, -0.2, 0.9), Vector3::new(4.0, 5.0, -6.0), Vector3::new(1e-6, 0.0, 2e-6)] {
            let r = rodrigues(&w);
            let p = expm(&DMatrix::from_column_slice(3, 3, w.cross_matrix().as_slice())).unwrap();
            let d = (DMatrix::from_column_slice(3, 3, r.as_slice()) - p).amax();
            assert!(d < 1e-13, "{d}");
        }
    }

    #[test]
    fn logm_inverts_expm() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, 0.9, -0.3, -0.4, -0.5, 0.6, 0.2, 0.3, 0.4]);
        let l = logm(&expm(&a).unwrap()).unwrap();
        assert!((l - a).amax() < 1e-12);
    }

    #[test]
    fn logm_fails_on_negative_eigenvalue() {
        let g = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        assert!(logm(&g).is_err());
    }

    #[test]
    fn phi1_scalar() {
        let z = DMatrix::from_element(1, 1, 1.0);
        assert!((phi1(&z).unwrap()[(0, 0)] - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert_eq!(phi1(&DMatrix::zeros(3, 3)).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn phi1_paths_agree() {
        // Small Z: solve path vs series path.
        let mut rng = StdRng::seed_from_u64(7);
        let z = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let z = &z * (1e-6 / z.norm());
        let e = expm_minus_identity(&z).unwrap();
        let solved = z.clone().lu().solve(&e).unwrap();
        let series = phi1_taylor(&z, 18);
        assert!((solved - series).amax() < 1e-12);
        // Large singular Z: block-exponential path vs long series.
        let mut s = DMatrix::zeros(3, 3);
        s[(0, 1)] = 3.0;
        s[(1, 0)] = -1.0;
        let p = phi1(&s).unwrap();
        let t = phi1_taylor(&s, 60);
        assert!((p - t).amax() < 1e-12);
    }
}
