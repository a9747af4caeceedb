//! Semiclassical wave fields from Maslov's canonical operator.
//!
//! The crate evaluates fields on parametrized Lagrangian manifolds in both the
//! classical canonical-chart form and the eikonal-coordinate form that stays
//! regular at caustics, together with Maslov indices, stationary phase and
//! the passage from Fourier integrals to the canonical operator.

pub mod bridge;
pub mod canonical;
pub mod error;
pub mod examples;
pub mod linalg;
pub mod manifold;
pub mod maslov;
pub mod oscillatory;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use linalg::C64;
