//! Constrained Bayesian optimization with max-value entropy search.
//!
//! The crate provides exact GP regression ([`gp`]), an expectation
//! propagation classifier for binary constraint feedback ([`constraint`]),
//! the cMES acquisition score with real-valued, binary, and marginal
//! information terms ([`acquisition`]), Thompson sampling of the
//! constrained minimum ([`thompson`]), baseline acquisitions
//! ([`baselines`]), and a sequential optimization driver over mixed
//! search spaces ([`driver`]).

pub mod acquisition;
pub mod baselines;
pub mod constraint;
pub mod driver;
pub mod error;
pub mod gp;
pub mod kernel;
pub mod math;
pub(crate) mod opt;
pub mod sobol;
mod sobol_table;
pub mod space;
pub mod thompson;

pub use error::{Error, Result};
