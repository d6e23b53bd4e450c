//! Coordinate maps `ψ: 𝔤 → G` with `ψ(0) = 1`, `T₀ψ = Id` and their
//! inverse right-trivialized differentials, plus retractions on the sphere.

mod chevalley;
mod retraction;

use std::sync::Arc;

pub use chevalley::{is_aob, AobCertificate, AobWitness, ChevalleyBasis, ChevalleyElement};
pub use retraction::{
    retraction, retraction_inv, tangent_solve, EmbeddedManifold, RetractionChart, RetractionKind, TANGENT_TOL,
};

use crate::error::{Error, Result};
use crate::lie_core::{
    cayley, dcay, dcay_inv, dexp, dexpinv, group_exp, AlgebraDescriptor, AlgebraElement, AlgebraKind, GroupElement,
};

/// Which coordinate map.
#[derive(Clone, Debug)]
pub enum CoordinateKind {
    /// The exponential with `dexp⁻¹` truncated after `truncation` Bernoulli terms.
    Exp { truncation: usize },
    Cayley,
    /// Canonical coordinates of the second kind in an ordered Chevalley basis.
    SecondKind(Arc<ChevalleyBasis>),
}

#[derive(Clone, Debug)]
pub struct CoordinateMap {
    kind: CoordinateKind,
    descriptor: AlgebraDescriptor,
}

impl CoordinateMap {
    pub fn exp(descriptor: AlgebraDescriptor, truncation: usize) -> Result<Self> {
        if truncation > crate::lie_core::DEXPINV_MAX_TRUNCATION {
            return Err(Error::unsupported(format!("dexpinv truncation {truncation}")));
        }
        Ok(Self { kind: CoordinateKind::Exp { truncation }, descriptor })
    }

    /// The Cayley map, which maps into the group only for quadratic algebras
    /// (so(n) is the case `J = I`).
    pub fn cayley(descriptor: AlgebraDescriptor) -> Result<Self> {
        match descriptor.kind() {
            AlgebraKind::So(_) | AlgebraKind::Quadratic(_) => Ok(Self { kind: CoordinateKind::Cayley, descriptor }),
            _ => Err(Error::unsupported(format!("the Cayley map does not map {descriptor} into its group"))),
        }
    }

    pub fn second_kind(basis: Arc<ChevalleyBasis>) -> Self {
        let descriptor = basis.descriptor();
        Self { kind: CoordinateKind::SecondKind(basis), descriptor }
    }

    pub fn kind(&self) -> &CoordinateKind {
        &self.kind
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.descriptor
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            CoordinateKind::Exp { .. } => "exp",
            CoordinateKind::Cayley => "cayley",
            CoordinateKind::SecondKind(_) => "cc2k",
        }
    }

    /// `ψ(u)`.
    pub fn psi(&self, u: &AlgebraElement) -> Result<GroupElement> {
        self.descriptor.check_same(u.descriptor())?;
        match &self.kind {
            CoordinateKind::Exp { .. } => group_exp(u),
            CoordinateKind::Cayley => cayley(u),
            CoordinateKind::SecondKind(b) => b.psi(u),
        }
    }

    /// `dψ_u⁻¹(v)`.
    pub fn dpsi_inv(&self, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        match &self.kind {
            CoordinateKind::Exp { truncation } => dexpinv(u, v, *truncation),
            CoordinateKind::Cayley => dcay_inv(u, v),
            CoordinateKind::SecondKind(b) => b.dpsi_inv(u, v),
        }
    }

    /// `dψ_u(v)`; the exponential uses 20 series terms.
    pub fn dpsi(&self, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        match &self.kind {
            CoordinateKind::Exp { .. } => dexp(u, v, 20),
            CoordinateKind::Cayley => dcay(u, v),
            CoordinateKind::SecondKind(b) => b.dpsi(u, v),
        }
    }
}

/// `ψ(u)` for any coordinate map.
pub fn psi(map: &CoordinateMap, u: &AlgebraElement) -> Result<GroupElement> {
    map.psi(u)
}

/// `dψ_u⁻¹(v)` for canonical coordinates of the second kind.
pub fn dpsi_inv_cc2k(basis: &ChevalleyBasis, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
    basis.dpsi_inv(u, v)
}

/// `dψ_u(v)` for canonical coordinates of the second kind.
pub fn dpsi_cc2k(basis: &ChevalleyBasis, u: &AlgebraElement, v: &AlgebraElement) -> Result<AlgebraElement> {
    basis.dpsi(u, v)
}
