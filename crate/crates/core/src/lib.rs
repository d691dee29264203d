//! Exact finite computation of network-interference estimands: exposure
//! mappings, assignment mechanisms, the exposure-contrast estimand and
//! the assumptions and sign-preservation criteria that govern it.

pub mod error;
pub mod estimands;
pub mod exposures;
pub mod mechanisms;
pub mod netcore;
pub mod outcomes;
pub mod scenario;
pub mod verdict;

#[cfg(test)]
mod fixtures;

pub use error::{Error, Result};
pub use verdict::Verdict;
