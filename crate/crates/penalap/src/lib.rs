//! Volume penalization for inhomogeneous Neumann conditions on periodic
//! Cartesian grids.

pub mod analytic;
pub mod convection;
pub mod error;
pub mod grid;
pub mod harness;
pub mod operators;
pub mod solvers;

pub use error::{Error, Result};
