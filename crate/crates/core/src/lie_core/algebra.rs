use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

/// Construction tolerance for algebra membership, relative to unit scale.
pub const MEMBERSHIP_TOL: f64 = 1e-13;

/// The bilinear form `J` of a quadratic group `{A : AᵀJA = J}` together with
/// an orthonormal basis of its Lie algebra `{a : aᵀJ + Ja = 0}`.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    j: DMatrix<f64>,
    basis: Vec<DMatrix<f64>>,
}

impl QuadraticForm {
    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }
}

/// Which matrix Lie algebra an element lives in.
#[derive(Clone, Debug)]
pub enum AlgebraKind {
    So(usize),
    Sl(usize),
    Gl(usize),
    Quadratic(Arc<QuadraticForm>),
    /// Pairs `(ξ, c)` acting on `ℝⁿ` by `x ↦ ξx + c`.
    Affine(usize),
}

impl PartialEq for AlgebraKind {
    fn eq(&self, other: &Self) -> bool {
        use AlgebraKind::*;
        match (self, other) {
            (So(a), So(b)) | (Sl(a), Sl(b)) | (Gl(a), Gl(b)) | (Affine(a), Affine(b)) => a == b,
            (Quadratic(a), Quadratic(b)) => Arc::ptr_eq(a, b) || a.j == b.j,
            _ => false,
        }
    }
}

/// Describes a matrix Lie algebra and its group.
///
/// Affine elements `(ξ, c)` and group elements `(A, b)` are stored as
/// `(n+1)×(n+1)` block matrices `[[ξ, c], [0, 0]]` and `[[A, b], [0, 1]]`,
/// so brackets, products and exponentials are plain matrix operations.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraDescriptor {
    kind: AlgebraKind,
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AlgebraKind::So(n) => write!(f, "so({n})"),
            AlgebraKind::Sl(n) => write!(f, "sl({n})"),
            AlgebraKind::Gl(n) => write!(f, "gl({n})"),
            AlgebraKind::Quadratic(q) => write!(f, "quadratic({})", q.j.nrows()),
            AlgebraKind::Affine(n) => write!(f, "aff({n})"),
        }
    }
}

impl AlgebraDescriptor {
    pub fn so(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("so(n) needs n >= 2"));
        }
        Ok(Self { kind: AlgebraKind::So(n) })
    }

    /// Shorthand for `so(3)`, which cannot fail.
    pub fn so3() -> Self {
        Self { kind: AlgebraKind::So(3) }
    }

    pub fn sl(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("sl(n) needs n >= 2"));
        }
        Ok(Self { kind: AlgebraKind::Sl(n) })
    }

    pub fn gl(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("gl(n) needs n >= 1"));
        }
        Ok(Self { kind: AlgebraKind::Gl(n) })
    }

    pub fn affine(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("aff(n) needs n >= 1"));
        }
        Ok(Self { kind: AlgebraKind::Affine(n) })
    }

    /// The algebra of the group preserving the bilinear form `J`.
    pub fn quadratic(j: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if n == 0 || j.ncols() != n {
            return Err(Error::domain("J must be a nonempty square matrix"));
        }
        if !j.iter().all(|x| x.is_finite()) {
            return Err(Error::numeric("J has non-finite entries"));
        }
        let svd = j.clone().svd(false, false);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= 1e-12 * smax.max(1.0) {
            return Err(Error::domain("J must be invertible"));
        }
        // Null space of a ↦ aᵀJ + Ja, via the symmetric eigenproblem of MᵀM.
        let nn = n * n;
        let mut m = DMatrix::zeros(nn, nn);
        for col in 0..nn {
            let mut a = DMatrix::zeros(n, n);
            a[(col % n, col / n)] = 1.0;
            let img = a.transpose() * &j + &j * &a;
            m.set_column(col, &DVector::from_column_slice(img.as_slice()));
        }
        let eig = SymmetricEigen::new(m.transpose() * &m);
        let scale = eig.eigenvalues.amax().max(1.0);
        let mut basis: Vec<DMatrix<f64>> = Vec::new();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda.abs() <= 1e-10 * scale {
                let v = eig.eigenvectors.column(k);
                basis.push(DMatrix::from_column_slice(n, n, v.as_slice()));
            }
        }
        // Re-orthonormalize against roundoff in the eigensolver.
        let mut ortho: Vec<DMatrix<f64>> = Vec::new();
        for mut b in basis {
            for q in &ortho {
                let c = frobenius(q, &b);
                b -= q * c;
            }
            let nb = b.norm();
            if nb > 1e-8 {
                ortho.push(b / nb);
            }
        }
        Ok(Self {
            kind: AlgebraKind::Quadratic(Arc::new(QuadraticForm { j, basis: ortho })),
        })
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    /// Size of the stored matrices.
    pub fn matrix_size(&self) -> usize {
        match &self.kind {
            AlgebraKind::So(n) | AlgebraKind::Sl(n) | AlgebraKind::Gl(n) => *n,
            AlgebraKind::Quadratic(q) => q.j.nrows(),
            AlgebraKind::Affine(n) => n + 1,
        }
    }

    /// Dimension of the algebra as a real vector space.
    pub fn dim(&self) -> usize {
        match &self.kind {
            AlgebraKind::So(n) => n * (n - 1) / 2,
            AlgebraKind::Sl(n) => n * n - 1,
            AlgebraKind::Gl(n) => n * n,
            AlgebraKind::Quadratic(q) => q.basis.len(),
            AlgebraKind::Affine(n) => n * n + n,
        }
    }

    pub fn is_so3(&self) -> bool {
        matches!(self.kind, AlgebraKind::So(3))
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, AlgebraKind::Affine(_))
    }

    /// Scale of the trace pairing. For so(3) it is ½ so that the pairing of
    /// hat matrices equals the dot product of the underlying 3-vectors.
    pub(crate) fn pairing_scale(&self) -> f64 {
        if self.is_so3() {
            0.5
        } else {
            1.0
        }
    }

    /// The duality pairing on the stored matrices.
    pub fn pairing(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        self.pairing_scale() * frobenius(a, b)
    }

    /// Orthogonal projection of an arbitrary matrix onto the algebra.
    pub fn project(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.kind {
            AlgebraKind::So(_) => (x - x.transpose()) * 0.5,
            AlgebraKind::Sl(n) => {
                let mut y = x.clone();
                let t = x.trace() / *n as f64;
                for i in 0..*n {
                    y[(i, i)] -= t;
                }
                y
            }
            AlgebraKind::Gl(_) => x.clone(),
            AlgebraKind::Quadratic(q) => {
                let mut y = DMatrix::zeros(x.nrows(), x.ncols());
                for b in &q.basis {
                    y += b * frobenius(b, x);
                }
                y
            }
            AlgebraKind::Affine(n) => {
                let mut y = x.clone();
                for j in 0..=*n {
                    y[(*n, j)] = 0.0;
                }
                y
            }
        }
    }

    /// A basis of the algebra, orthonormal for [`AlgebraDescriptor::pairing`].
    /// For so(3) it is the hat images of the standard basis of ℝ³.
    pub fn basis(&self) -> Vec<DMatrix<f64>> {
        let n = self.matrix_size();
        let unit = |i: usize, j: usize| {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m
        };
        match &self.kind {
            AlgebraKind::So(3) => (0..3)
                .map(|k| {
                    let mut e = Vector3::zeros();
                    e[k] = 1.0;
                    hat(&e)
                })
                .collect(),
            AlgebraKind::So(_) => {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        out.push((unit(i, j) - unit(j, i)) / 2f64.sqrt());
                    }
                }
                out
            }
            AlgebraKind::Sl(_) => {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            out.push(unit(i, j));
                        }
                    }
                }
                for k in 1..n {
                    let mut m = DMatrix::zeros(n, n);
                    for i in 0..k {
                        m[(i, i)] = 1.0;
                    }
                    m[(k, k)] = -(k as f64);
                    out.push(m / ((k + k * k) as f64).sqrt());
                }
                out
            }
            AlgebraKind::Gl(_) => {
                let mut out = Vec::new();
                for j in 0..n {
                    for i in 0..n {
                        out.push(unit(i, j));
                    }
                }
                out
            }
            AlgebraKind::Quadratic(q) => q.basis.clone(),
            AlgebraKind::Affine(nd) => {
                let mut out = Vec::new();
                for j in 0..*nd {
                    for i in 0..*nd {
                        out.push(unit(i, j));
                    }
                }
                for i in 0..*nd {
                    out.push(unit(i, *nd));
                }
                out
            }
        }
    }

    /// Coordinates of an algebra matrix in [`AlgebraDescriptor::basis`].
    pub fn coords(&self, x: &DMatrix<f64>) -> DVector<f64> {
        if self.is_so3() {
            return DVector::from_column_slice(vee(x).as_slice());
        }
        let b = self.basis();
        DVector::from_iterator(b.len(), b.iter().map(|e| self.pairing(e, x)))
    }

    /// Inverse of [`AlgebraDescriptor::coords`].
    pub fn from_coords(&self, c: &DVector<f64>) -> Result<DMatrix<f64>> {
        if c.len() != self.dim() {
            return Err(Error::domain(format!(
                "{} has dimension {}, got {} coordinates",
                self,
                self.dim(),
                c.len()
            )));
        }
        if self.is_so3() {
            return Ok(hat(&Vector3::new(c[0], c[1], c[2])));
        }
        let n = self.matrix_size();
        let mut m = DMatrix::zeros(n, n);
        for (e, ci) in self.basis().iter().zip(c.iter()) {
            m += e * *ci;
        }
        Ok(m)
    }

    fn check_shape(&self, x: &DMatrix<f64>) -> Result<()> {
        let n = self.matrix_size();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::domain(format!(
                "{} expects {n}x{n} matrices, got {}x{}",
                self,
                x.nrows(),
                x.ncols()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::numeric("non-finite matrix entries"));
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &AlgebraDescriptor) -> Result<()> {
        if self != other {
            return Err(Error::domain(format!("descriptor mismatch: {} vs {}", self, other)));
        }
        Ok(())
    }
}

pub(crate) fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// The hat map `ℝ³ → so(3)` with `hat(a) x = a × x`.
pub fn hat(a: &Vector3<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0])
}

/// Inverse of [`hat`] on the skew part of a 3×3 matrix.
pub fn vee(m: &DMatrix<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

fn membership_error(desc: &AlgebraDescriptor, x: &DMatrix<f64>) -> Option<f64> {
    let resid = (x - desc.project(x)).amax();
    let tol = MEMBERSHIP_TOL * x.amax().max(1.0);
    (resid > tol).then_some(resid)
}

/// An element of a matrix Lie algebra.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    desc: AlgebraDescriptor,
    mat: DMatrix<f64>,
}

/// An element of the dual of a Lie algebra, stored in the same shape and
/// identified with matrices through [`AlgebraDescriptor::pairing`].
#[derive(Clone, Debug)]
pub struct CoAlgebraElement {
    desc: AlgebraDescriptor,
    mat: DMatrix<f64>,
}

macro_rules! algebra_like {
    ($t:ident) => {
        impl $t {
            /// Validates membership to the construction tolerance.
            pub fn new(desc: AlgebraDescriptor, mat: DMatrix<f64>) -> Result<Self> {
                desc.check_shape(&mat)?;
                if let Some(r) = membership_error(&desc, &mat) {
                    return Err(Error::domain(format!("matrix is not in {desc} (residual {r:.2e})")));
                }
                let mat = desc.project(&mat);
                Ok(Self { desc, mat })
            }

            /// Projects an arbitrary matrix of the right shape onto the algebra.
            pub fn projected(desc: AlgebraDescriptor, mat: &DMatrix<f64>) -> Result<Self> {
                desc.check_shape(mat)?;
                let mat = desc.project(mat);
                Ok(Self { desc, mat })
            }

            pub(crate) fn from_raw(desc: AlgebraDescriptor, mat: DMatrix<f64>) -> Self {
                Self { desc, mat }
            }

            pub fn zero(desc: AlgebraDescriptor) -> Self {
                let n = desc.matrix_size();
                Self { desc, mat: DMatrix::zeros(n, n) }
            }

            pub fn from_coords(desc: AlgebraDescriptor, c: &DVector<f64>) -> Result<Self> {
                let mat = desc.from_coords(c)?;
                Ok(Self { desc, mat })
            }

            /// so(3) element from a 3-vector.
            pub fn so3(v: Vector3<f64>) -> Self {
                Self { desc: AlgebraDescriptor::so3(), mat: hat(&v) }
            }

            /// The 3-vector of an so(3) element.
            pub fn so3_vector(&self) -> Vector3<f64> {
                debug_assert!(self.desc.is_so3());
                vee(&self.mat)
            }

            pub fn coords(&self) -> DVector<f64> {
                self.desc.coords(&self.mat)
            }

            pub fn matrix(&self) -> &DMatrix<f64> {
                &self.mat
            }

            pub fn descriptor(&self) -> &AlgebraDescriptor {
                &self.desc
            }

            /// Norm induced by the pairing.
            pub fn norm(&self) -> f64 {
                self.desc.pairing(&self.mat, &self.mat).sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.mat.iter().all(|x| x.is_finite())
            }

            pub fn scale(&self, s: f64) -> Self {
                Self { desc: self.desc.clone(), mat: &self.mat * s }
            }

            /// `self + s·other`.
            pub fn axpy(&self, s: f64, other: &Self) -> Self {
                debug_assert_eq!(self.desc, other.desc);
                Self { desc: self.desc.clone(), mat: &self.mat + &other.mat * s }
            }

            /// Affine pair `(ξ, c)`, if this is an affine element.
            pub fn affine_parts(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
                match self.desc.kind() {
                    AlgebraKind::Affine(n) => Some((
                        self.mat.view((0, 0), (*n, *n)).into_owned(),
                        self.mat.view((0, *n), (*n, 1)).column(0).into_owned(),
                    )),
                    _ => None,
                }
            }

            /// Affine element from the pair `(ξ, c)`.
            pub fn affine(xi: &DMatrix<f64>, c: &DVector<f64>) -> Result<Self> {
                let n = c.len();
                if xi.nrows() != n || xi.ncols() != n {
                    return Err(Error::domain("affine pair has inconsistent sizes"));
                }
                let desc = AlgebraDescriptor::affine(n)?;
                let mut mat = DMatrix::zeros(n + 1, n + 1);
                mat.view_mut((0, 0), (n, n)).copy_from(xi);
                mat.view_mut((0, n), (n, 1)).copy_from(c);
                desc.check_shape(&mat)?;
                Ok(Self { desc, mat })
            }
        }

        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                debug_assert_eq!(self.desc, rhs.desc);
                $t { desc: self.desc.clone(), mat: &self.mat + &rhs.mat }
            }
        }

        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                debug_assert_eq!(self.desc, rhs.desc);
                $t { desc: self.desc.clone(), mat: &self.mat - &rhs.mat }
            }
        }

        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                &self + &rhs
            }
        }

        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                &self - &rhs
            }
        }

        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self.scale(-1.0)
            }
        }

        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self.scale(-1.0)
            }
        }

        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                self.scale(s)
            }
        }

        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                self.scale(s)
            }
        }
    };
}

algebra_like!(AlgebraElement);
algebra_like!(CoAlgebraElement);

impl CoAlgebraElement {
    /// `⟨μ, ξ⟩`.
    pub fn pairing(&self, xi: &AlgebraElement) -> Result<f64> {
        self.desc.check_same(xi.descriptor())?;
        Ok(self.desc.pairing(&self.mat, xi.matrix()))
    }

    /// The algebra element with the same stored matrix (the pairing's
    /// Riesz representative).
    pub fn to_algebra(&self) -> AlgebraElement {
        AlgebraElement::from_raw(self.desc.clone(), self.mat.clone())
    }
}

impl AlgebraElement {
    /// The covector with the same stored matrix.
    pub fn to_coalgebra(&self) -> CoAlgebraElement {
        CoAlgebraElement::from_raw(self.desc.clone(), self.mat.clone())
    }
}

/// An element of the matrix group of a descriptor.
#[derive(Clone, Debug)]
pub struct GroupElement {
    desc: AlgebraDescriptor,
    mat: DMatrix<f64>,
}

impl GroupElement {
    /// Checks shape and invertibility. Membership in the specific group is
    /// checked on demand by [`GroupElement::membership_defect`].
    pub fn new(desc: AlgebraDescriptor, mat: DMatrix<f64>) -> Result<Self> {
        desc.check_shape(&mat)?;
        if let AlgebraKind::Affine(n) = desc.kind() {
            let n = *n;
            for j in 0..=n {
                let want = if j == n { 1.0 } else { 0.0 };
                if (mat[(n, j)] - want).abs() > MEMBERSHIP_TOL {
                    return Err(Error::domain("affine group element must have last row (0, ..., 0, 1)"));
                }
            }
        }
        let g = Self { desc, mat };
        g.inverse()?;
        Ok(g)
    }

    pub(crate) fn from_raw(desc: AlgebraDescriptor, mat: DMatrix<f64>) -> Self {
        Self { desc, mat }
    }

    pub fn identity(desc: AlgebraDescriptor) -> Self {
        let n = desc.matrix_size();
        Self { desc, mat: DMatrix::identity(n, n) }
    }

    /// Affine group element from `(A, b)`.
    pub fn affine(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::domain("affine pair has inconsistent sizes"));
        }
        let mut mat = DMatrix::identity(n + 1, n + 1);
        mat.view_mut((0, 0), (n, n)).copy_from(a);
        mat.view_mut((0, n), (n, 1)).copy_from(b);
        Self::new(AlgebraDescriptor::affine(n)?, mat)
    }

    /// `(A, b)` for an affine group element.
    pub fn affine_parts(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        match self.desc.kind() {
            AlgebraKind::Affine(n) => Some((
                self.mat.view((0, 0), (*n, *n)).into_owned(),
                self.mat.view((0, *n), (*n, 1)).column(0).into_owned(),
            )),
            _ => None,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.desc
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        self.desc.check_same(&other.desc)?;
        Ok(Self { desc: self.desc.clone(), mat: &self.mat * &other.mat })
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let inv = match self.desc.kind() {
            AlgebraKind::So(_) => Some(self.mat.transpose()),
            _ => self.mat.clone().try_inverse(),
        };
        match inv {
            Some(m) if m.iter().all(|x| x.is_finite()) => Ok(Self { desc: self.desc.clone(), mat: m }),
            _ => Err(Error::numeric("group element is singular")),
        }
    }

    /// Distance from the group: `‖gᵀg − I‖∞` for so, `|det g − 1|` for sl,
    /// `‖gᵀJg − J‖∞` for quadratic groups and 0 otherwise.
    pub fn membership_defect(&self) -> f64 {
        let n = self.mat.nrows();
        match self.desc.kind() {
            AlgebraKind::So(_) => (self.mat.transpose() * &self.mat - DMatrix::identity(n, n)).amax(),
            AlgebraKind::Sl(_) => (self.mat.determinant() - 1.0).abs(),
            AlgebraKind::Quadratic(q) => (self.mat.transpose() * &q.j * &self.mat - &q.j).amax(),
            _ => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mat.iter().all(|x| x.is_finite())
    }
}
