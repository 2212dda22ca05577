//! Simulation and Lyapunov certification of a nonlocal delayed diffusive
//! dengue model on a one-dimensional domain with no-flux boundaries.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod spectral;

pub use error::{ModelError, Result};
pub mod equilibria;
pub mod integrator;
pub mod lyapunov;
pub mod config;
pub mod output;
pub mod sweep;
