//! Bounded-coefficient integer encodings for mapping box-constrained integer
//! quadratic programs onto Ising and QUBO models.

pub mod bounds;
pub mod cli;
pub mod encodings;
pub mod error;
pub mod model;
pub mod resilience;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
