//! Potential-outcome models and checks on their interference structure.
//!
//! Outcome noise is folded into contexts: each context fixes one noise
//! state, so every model is a deterministic table per context.

mod checks;
mod context;
mod structural;
mod table;

pub use checks::{check_correct_specification, check_k_locality, OutcomeWitness};
pub use context::{Context, ContextSet, EXACT_TOL};
pub use structural::{ani_discrepancy, ani_profile, AniDiscrepancy, Evaluator, Restriction, StructuralFamily};
pub use table::OutcomeTable;

use crate::error::Result;
use crate::netcore::Assignment;

/// Conditional-mean outcomes `E[Y_i(d) | c]`.
pub trait PotentialOutcomes: Send + Sync {
    fn n(&self) -> usize;

    fn mean_outcome(&self, context: usize, unit: usize, d: Assignment) -> Result<f64>;
}

impl<T: PotentialOutcomes + ?Sized> PotentialOutcomes for &T {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn mean_outcome(&self, context: usize, unit: usize, d: Assignment) -> Result<f64> {
        (**self).mean_outcome(context, unit, d)
    }
}
