//! Geometric numerical integration on Lie groups and homogeneous spaces.
//!
//! The crate is organized bottom-up: [`lie_core`] holds matrix Lie algebras
//! and groups, [`actions`] turns them into vector fields on manifolds,
//! [`coords`] supplies coordinate maps, [`integrators`] the Lie group
//! schemes, [`order_theory`] the ordered-tree order conditions,
//! [`structure`] the variational and energy-preserving schemes and
//! [`harness`] the problem registry and experiment drivers.

pub mod error;
pub mod lie_core;
pub mod actions;
pub mod coords;
pub mod integrators;
pub mod order_theory;
pub mod structure;
pub mod harness;

pub use error::{Error, Result};
