//! Graphs, neighborhoods, assignment-vector algebra and labelled
//! subnetwork isomorphism.
//!
//! Units are 0-based in the Rust API. Scenario files, reports and error
//! messages use 1-based labels.

mod assignment;
mod iso;
mod network;

pub use assignment::{Assignment, SubWord, UnitIter, UnitSet, MAX_UNITS};
pub use iso::{is_witness, labeled_isomorphic, labeled_isomorphic_anchored, Permutation, ISOMORPHISM_CAP};
pub use network::{Network, NetworkRecord};

use crate::error::{Error, Result};

/// Configurable ceiling for full `{0,1}^n` enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap(usize);

impl EnumerationCap {
    pub const MAX: EnumerationCap = EnumerationCap(MAX_UNITS);

    /// Caps above [`MAX_UNITS`] are clamped down to it.
    pub fn new(max_n: usize) -> Self {
        EnumerationCap(max_n.min(MAX_UNITS))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, n: usize) -> Result<()> {
        if n > self.0 {
            Err(Error::EnumerationCap { n, cap: self.0 })
        } else {
            Ok(())
        }
    }
}

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap::MAX
    }
}
