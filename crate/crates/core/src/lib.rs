//! Numerical tools for well separated odd maps on spheres: hemisphere
//! imbalances of densities, separation witnesses, the odd cut-off function
//! and solvers that hit every target in the cube `[-1, 1]^m`.

pub mod chi;
pub mod cli;
pub mod density;
pub mod error;
pub mod fieldmap;
pub mod geometry;
pub mod problem;
pub mod quadrature;
pub mod search;
pub mod separation;
pub mod solver;

pub use error::{Error, Result};
