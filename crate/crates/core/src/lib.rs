//! Space-time multiscale mortar mixed finite elements for the parabolic
//! Darcy problem `∂_t p − ∇·K∇p = q` on rectangular subdomain decompositions
//! with non-matching grids and local time steps.

pub mod dd;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod interface;
pub mod linalg;
pub mod mortar;
pub mod quadrature;
pub mod subdomain;
pub mod verification;

pub use error::{FemError, GeometryError, MortarError, SolverError};
