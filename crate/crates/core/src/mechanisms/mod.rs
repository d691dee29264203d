//! Assignment mechanisms, conditional laws, independence checks, the
//! incomplete-information take-up game and the urn coupling.

mod conditional;
mod coupling;
mod game;
mod law;

pub use conditional::{
    check_ci_selection, check_unconfoundedness, check_unit_independence, conditional_law, event_mass,
    CiWitness, ConfoundingWitness, DependenceWitness,
};
pub use coupling::{
    coupling_gap, exact_coupling_law, exact_coupling_law_with, sample_coupled_pair, CoupledPair,
    CouplingGap, CouplingSpec, ExactCoupling,
};
pub use game::{solve_incomplete_info_game, GameSolution, Profile, SelectionGame, TypeAtom, Utility, UtilityFn};
pub use law::{AssignmentLaw, Distribution, Mechanism};
