//! Nested lattice coset coding for compound MIMO wiretap channels.

pub mod channel;
pub mod codec;
pub mod construction_a;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod security;

pub use error::{Error, Result};
pub use lattice::{Lattice, LatticePoint};
