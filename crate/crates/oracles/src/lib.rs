//! Reference computations for validating the optimization library.
//!
//! Everything here is deliberately written from scratch against textbook
//! definitions — adaptive quadrature, dense Gaussian elimination, two-sample
//! tests — so the checked implementations and their oracles share no code
//! paths. The crate is a dev-dependency only; nothing in it ships.

pub mod entropy;
pub mod linalg;
pub mod normal;
pub mod quad;
pub mod stats;
pub mod tables;
