//! Numerical workbench for semi-Riemannian cones, warped products and their
//! parallel structures.

pub mod clifford_spin;
pub mod cone;
pub mod error;
pub mod holonomy;
pub mod metric_core;
pub mod nullplane;
pub mod split_fields;
pub mod stock;
pub mod warped;

pub use error::{GeomError, Result};
