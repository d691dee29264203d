//! The exposure-contrast estimand, its decomposition into a weighted
//! average of unit-level contrasts plus a selection bias, comparison
//! sets, sign-preservation verdicts and the reversal search.

mod ani;
mod comparison;
mod problem;
mod search;
mod tau;

pub use ani::{ani_bias_check, AniBiasReport};
pub use comparison::{
    check_sign_preservation, comparison_set, ComparisonEntry, ComparisonKind, ComparisonSet, Premise, SignOutcome,
    SignVerdict,
};
pub(crate) use comparison::sign_verdict;
pub use problem::{EstimandSpec, Problem};
pub use search::{
    candidate, search_reversals, Candidate, Counterexample, MechanismFamily, NetworkFamily, SearchConfig,
    SearchOutcome,
};
pub use tau::{
    bias_rn, decompose, pinned_neighborhoods, tau, tau_star, ContextTerm, Decomposition, DecompositionTerm,
    TauResult, UnitTerm,
};
