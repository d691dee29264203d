//! Scenario files, reports and the workflows behind the command line.

pub mod experiments;
pub mod format;
mod load;
mod reproduce;
mod run;

pub use experiments::{
    counterexample_text, coupling_network, parse_search_config, run_coupling, run_search, CouplingConfig,
    CouplingGraph, CouplingReport, CouplingRow, GraphSpec, SearchHit, SearchReport,
};
pub use load::{load_scenario, parse_scenario, Check, OutcomeModel, Scenario, SolvedGame};
pub use reproduce::{reproduce, Assertion, Example, Reproduction};
pub use run::{run, AssumptionRecord, Report, RunFlags, UnitRow, TOOL_VERSION};

use crate::error::{Error, Result};
use crate::netcore::EnumerationCap;

pub const BUNDLED_COUPLING_STAR: &str = include_str!("../../scenarios/coupling_star.toml");
pub const BUNDLED_COUPLING_FULL: &str = include_str!("../../scenarios/coupling_full.toml");
pub const BUNDLED_SEARCH_PINDOWN: &str = include_str!("../../scenarios/search_pindown.toml");
pub const BUNDLED_SEARCH_OVERALL: &str = include_str!("../../scenarios/search_overall.toml");

/// Bundled scenario files by name.
pub const BUNDLED_SCENARIOS: [(&str, &str); 4] = [
    ("dyad_dim", include_str!("../../scenarios/dyad_dim.scn")),
    ("triad_spillover", include_str!("../../scenarios/triad_spillover.scn")),
    ("quad_ordered", include_str!("../../scenarios/quad_ordered.scn")),
    ("game_prop1", include_str!("../../scenarios/game_prop1.scn")),
];

pub fn bundled_text(name: &str) -> Option<&'static str> {
    let name = name.trim_end_matches(".scn");
    BUNDLED_SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn bundled(name: &str) -> Result<Scenario> {
    let text = bundled_text(name).ok_or_else(|| Error::Io(format!("no bundled scenario named {name:?}")))?;
    parse_scenario(text, name, EnumerationCap::MAX)
}
