//! Rotationally invariant hypersurfaces of constant mean curvature in the
//! Heisenberg group `H^n`: generation, classification into the six
//! Delaunay-type families, measurement, and numerical verification.

pub mod classify;
pub mod closed_forms;
pub mod curvature;
pub mod error;
pub mod heisenberg;
pub mod measures;
pub mod polynomial;
pub mod profile_ode;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
