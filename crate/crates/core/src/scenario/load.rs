use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::format::*;
use crate::error::{Error, Result};
use crate::estimands::{ComparisonKind, EstimandSpec};
use crate::exposures::{subpopulation, ExposureSpec, IsoReference, SubpopulationRule};
use crate::mechanisms::{
    solve_incomplete_info_game, AssignmentLaw, Distribution, GameSolution, Mechanism, SelectionGame, TypeAtom,
    Utility,
};
use crate::netcore::{Assignment, EnumerationCap, Network, SubWord, UnitSet, ISOMORPHISM_CAP, MAX_UNITS};
use crate::outcomes::{Context, ContextSet, OutcomeTable, PotentialOutcomes, StructuralFamily};

/// A requested executable check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Unconfoundedness,
    UnitIndependence,
    Pindown,
    CiSelection,
    CorrectSpecification,
    KLocality,
    Sign(ComparisonKind),
    Ani,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Unconfoundedness => "unconfoundedness",
            Check::UnitIndependence => "unit_independence",
            Check::Pindown => "pindown",
            Check::CiSelection => "ci_selection",
            Check::CorrectSpecification => "correct_specification",
            Check::KLocality => "k_locality",
            Check::Sign(ComparisonKind::General) => "sign_general",
            Check::Sign(ComparisonKind::Partial) => "sign_partial",
            Check::Sign(ComparisonKind::Ordered) => "sign_ordered",
            Check::Ani => "ani",
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "unconfoundedness" => Check::Unconfoundedness,
            "unit_independence" => Check::UnitIndependence,
            "pindown" => Check::Pindown,
            "ci_selection" => Check::CiSelection,
            "correct_specification" => Check::CorrectSpecification,
            "k_locality" => Check::KLocality,
            "sign_general" => Check::Sign(ComparisonKind::General),
            "sign_partial" => Check::Sign(ComparisonKind::Partial),
            "sign_ordered" => Check::Sign(ComparisonKind::Ordered),
            "ani" => Check::Ani,
            other => return Err(format!("unknown check {other:?}")),
        })
    }
}

/// Outcome model of a scenario.
#[derive(Debug, Clone)]
pub enum OutcomeModel {
    Table(OutcomeTable),
    Structural(StructuralFamily),
}

impl OutcomeModel {
    pub fn as_dyn(&self) -> &dyn PotentialOutcomes {
        match self {
            OutcomeModel::Table(t) => t,
            OutcomeModel::Structural(f) => f,
        }
    }

    pub fn structural(&self) -> Option<&StructuralFamily> {
        match self {
            OutcomeModel::Structural(f) => Some(f),
            OutcomeModel::Table(_) => None,
        }
    }
}

/// A solved take-up game attached to one context.
#[derive(Debug, Clone)]
pub struct SolvedGame {
    pub context: String,
    pub game: SelectionGame,
    pub solution: GameSolution,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub net: Network,
    pub contexts: ContextSet,
    pub outcomes: OutcomeModel,
    pub mechanism: Mechanism,
    pub games: Vec<SolvedGame>,
    pub spec: EstimandSpec,
    pub subpopulation_warning: Option<String>,
    pub checks: Vec<Check>,
    pub k_prime: Option<usize>,
    pub seed: u64,
    /// SHA-256 of the source text.
    pub digest: String,
    pub outcome_rows: usize,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: n={}, {} contexts, exposure {}, t={} vs t'={}",
            self.name,
            self.net.n(),
            self.contexts.len(),
            self.spec.exposure,
            self.spec.t,
            self.spec.t_prime
        )
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    parse_scenario(&text, &name, EnumerationCap::MAX)
}

/// Parses and validates scenario text. `fallback_name` is used when the
/// file has no `name` key.
pub fn parse_scenario(text: &str, fallback_name: &str, cap: EnumerationCap) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(format!("{fallback_name}: {e}")))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    build(raw, fallback_name, digest, cap)
}

/// Collects every validation problem before giving up.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    fn take<T>(&mut self, r: std::result::Result<T, impl fmt::Display>, at: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(format!("{at}: {e}"));
                None
            }
        }
    }
}

fn parse_bits(s: &str, n: usize, at: &str, problems: &mut Problems) -> Option<Assignment> {
    if s.len() != n {
        problems.push(format!("{at}: assignment {s:?} has length {}, expected {n}", s.len()));
        return None;
    }
    let d = Assignment::parse(s);
    if d.is_none() {
        problems.push(format!("{at}: assignment {s:?} must contain only 0 and 1"));
    }
    d
}

fn build(raw: RawScenario, fallback_name: &str, digest: String, cap: EnumerationCap) -> Result<Scenario> {
    let mut problems = Problems::default();
    let n = raw.n;
    if n == 0 || n > MAX_UNITS {
        return Err(Error::Validation(vec![format!("n: must be between 1 and {MAX_UNITS}, got {n}")]));
    }
    if n > cap.get() {
        return Err(Error::EnumerationCap { n, cap: cap.get() });
    }
    let net = problems.take(Network::from_external_edges(n, &raw.edges), "edges");

    // contexts
    let contexts = if raw.contexts.is_empty() {
        Some(ContextSet::single())
    } else {
        let list = raw
            .contexts
            .iter()
            .map(|c| {
                let ctx = Context::new(c.id.clone(), c.weight);
                match &c.covariates {
                    Some(x) => ctx.with_covariates(x.clone()),
                    None => ctx,
                }
            })
            .collect();
        problems.take(ContextSet::new(list), "contexts")
    };
    let context_index = |id: &Option<String>, at: &str, problems: &mut Problems| -> Option<usize> {
        let cs = contexts.as_ref()?;
        match id {
            None if cs.len() == 1 => Some(0),
            None => {
                problems.push(format!("{at}: context is required when several contexts are declared"));
                None
            }
            Some(id) => {
                let found = cs.index_of(id);
                if found.is_none() {
                    problems.push(format!("{at}: unknown context {id:?}"));
                }
                found
            }
        }
    };

    // exposure
    let exposure = build_exposure(&raw.exposure, &mut problems);
    if let (Some(f), Some(k)) = (&exposure, raw.exposure.k) {
        if let Some(net) = &net {
            if !matches!(f, ExposureSpec::SubnetworkIso(_) | ExposureSpec::FractionTreated) && f.radius(net) != k {
                problems.push(format!("exposure: K = {k} does not match the {f} exposure (K = {})", f.radius(net)));
            }
        }
    }

    // outcomes
    let n_contexts = contexts.as_ref().map_or(1, ContextSet::len);
    let outcomes = match (&raw.structural, raw.outcomes.is_empty()) {
        (Some(_), false) => {
            problems.push("structural: give either a structural family or outcome rows, not both");
            None
        }
        (Some(s), true) => net.as_ref().and_then(|net| build_structural(s, net.clone(), &mut problems)),
        (None, _) => {
            let mut table = OutcomeTable::new(n, n_contexts, raw.default_outcome);
            for (k, row) in raw.outcomes.iter().enumerate() {
                let at = format!("outcomes[{}]", k + 1);
                let c = context_index(&row.context, &at, &mut problems);
                let d = parse_bits(&row.assignment, n, &at, &mut problems);
                let cells: Vec<(usize, f64)> = match (row.unit, row.value, &row.values) {
                    (Some(u), Some(v), None) => {
                        if u == 0 || u > n {
                            problems.push(format!("{at}: unit {u} outside 1..={n}"));
                            continue;
                        }
                        vec![(u - 1, v)]
                    }
                    (None, None, Some(vs)) if vs.len() == n => vs.iter().copied().enumerate().collect(),
                    (None, None, Some(vs)) => {
                        problems.push(format!("{at}: {} values for {n} units", vs.len()));
                        continue;
                    }
                    _ => {
                        problems.push(format!("{at}: give either `unit` and `value`, or `values`"));
                        continue;
                    }
                };
                if let (Some(c), Some(d)) = (c, d) {
                    for (i, v) in cells {
                        problems.take(table.set(c, i, d, v), &at);
                    }
                }
            }
            if raw.default_outcome.is_none() {
                let want = n_contexts * n << n;
                if table.stored_cells() < want {
                    let missing = (0..n_contexts)
                        .flat_map(|c| (0..n).map(move |i| (c, i)))
                        .flat_map(|(c, i)| Assignment::all(n).map(move |d| (c, i, d)))
                        .find(|&(c, i, d)| table.mean_outcome(c, i, d).is_err());
                    if let Some((c, i, d)) = missing {
                        let id = contexts.as_ref().map(|cs| cs.get(c).id.clone()).unwrap_or_default();
                        problems.push(format!(
                            "outcomes: {} of {want} cells are missing and there is no default_outcome, e.g. unit {} at {d} in context {id:?}",
                            want - table.stored_cells(),
                            i + 1
                        ));
                    }
                }
            }
            Some(OutcomeModel::Table(table))
        }
    };

    // mechanisms
    let mut games = Vec::new();
    let mechanism: Option<Mechanism> = match (&raw.mechanism, raw.mechanisms.is_empty()) {
        (Some(_), false) => {
            problems.push("mechanism: give either one shared mechanism or per-context mechanisms, not both");
            None
        }
        (None, true) => {
            problems.push("mechanism: missing");
            None
        }
        (Some(m), true) => net.as_ref().and_then(|net| {
            let law = build_law(m, net, "mechanism", &mut problems, cap)?;
            if let Some(g) = law.1 {
                for ctx in contexts.iter().flat_map(|c| c.iter()) {
                    games.push(SolvedGame {
                        context: ctx.id.clone(),
                        game: g.0.clone(),
                        solution: g.1.clone(),
                    });
                }
            }
            problems.take(Mechanism::shared(law.0, n_contexts), "mechanism")
        }),
        (None, false) => net.as_ref().and_then(|net| {
            let mut laws: Vec<Option<AssignmentLaw>> = vec![None; n_contexts];
            for (k, m) in raw.mechanisms.iter().enumerate() {
                let at = format!("mechanisms[{}]", k + 1);
                let c = context_index(&m.context, &at, &mut problems)?;
                if laws[c].is_some() {
                    problems.push(format!("{at}: second mechanism for context {}", c + 1));
                }
                let (law, game) = build_law(m, net, &at, &mut problems, cap)?;
                if let (Some((g, sol)), Some(cs)) = (game, &contexts) {
                    games.push(SolvedGame {
                        context: cs.get(c).id.clone(),
                        game: g,
                        solution: sol,
                    });
                }
                laws[c] = Some(law);
            }
            if let Some(missing) = laws.iter().position(Option::is_none) {
                let id = contexts.as_ref().map(|cs| cs.get(missing).id.clone()).unwrap_or_default();
                problems.push(format!("mechanisms: context {id:?} has no mechanism"));
                return None;
            }
            problems.take(Mechanism::new(laws.into_iter().flatten().collect()), "mechanisms")
        }),
    };

    // estimand
    let mut subpopulation_warning = None;
    let spec = match (&exposure, &net) {
        (Some(f), Some(net)) => {
            let t = f.parse_value(&raw.estimand.t);
            let tp = f.parse_value(&raw.estimand.t_prime);
            if t.is_none() {
                problems.push(format!("estimand.t: {:?} is not a value of the {f} exposure", raw.estimand.t));
            }
            if tp.is_none() {
                problems.push(format!(
                    "estimand.t_prime: {:?} is not a value of the {f} exposure",
                    raw.estimand.t_prime
                ));
            }
            let rule = build_rule(raw.estimand.subpopulation.as_ref(), f, &t, n, &mut problems);
            let units = rule.and_then(|r| problems.take(subpopulation(f, net, &r), "estimand.subpopulation"));
            match (t, tp, units) {
                (Some(t), Some(tp), Some(sub)) => {
                    subpopulation_warning = sub.warning.clone();
                    problems.take(EstimandSpec::new(f.clone(), t, tp, sub.units), "estimand")
                }
                _ => None,
            }
        }
        _ => None,
    };

    // checks
    let mut checks: Vec<Check> = raw
        .checks
        .iter()
        .filter_map(|c| problems.take(c.parse::<Check>(), "checks"))
        .collect();
    if raw.checks.is_empty() {
        checks = vec![
            Check::Unconfoundedness,
            Check::UnitIndependence,
            Check::Pindown,
            Check::CiSelection,
            Check::CorrectSpecification,
            Check::Sign(ComparisonKind::General),
            Check::Sign(ComparisonKind::Partial),
            Check::Sign(ComparisonKind::Ordered),
        ];
        if raw.k_prime.is_some() {
            checks.push(Check::KLocality);
        }
        if raw.structural.is_some() {
            checks.push(Check::Ani);
        }
    }
    checks.sort();
    checks.dedup();
    if checks.contains(&Check::KLocality) && raw.k_prime.is_none() {
        problems.push("checks: k_locality needs k_prime");
    }
    if checks.contains(&Check::Ani) && raw.structural.is_none() {
        problems.push("checks: ani needs a structural outcome family");
    }

    match (problems.0.is_empty(), net, contexts, outcomes, mechanism, spec) {
        (true, Some(net), Some(contexts), Some(outcomes), Some(mechanism), Some(spec)) => Ok(Scenario {
            name: raw.name.unwrap_or_else(|| fallback_name.to_string()),
            net,
            contexts,
            outcomes,
            mechanism,
            games,
            spec,
            subpopulation_warning,
            checks,
            k_prime: raw.k_prime,
            seed: raw.seed.unwrap_or(0),
            digest,
            outcome_rows: raw.outcomes.len(),
        }),
        _ => {
            if problems.0.is_empty() {
                problems.push("scenario is incomplete");
            }
            Err(Error::Validation(problems.0))
        }
    }
}

fn build_exposure(raw: &RawExposure, problems: &mut Problems) -> Option<ExposureSpec> {
    if raw.own_treatment == Some(false) {
        problems.push("exposure: own_treatment = false is not supported; exposures always include d_i");
    }
    let f = match raw.kind.as_str() {
        "dim" => ExposureSpec::Dim,
        "any_treated_neighbor" => ExposureSpec::AnyTreatedNeighbor,
        "neighbor_count" => ExposureSpec::NeighborCount,
        "fraction_treated" => ExposureSpec::FractionTreated,
        "subnetwork_iso" => {
            let Some(r) = &raw.reference else {
                problems.push("exposure: subnetwork_iso needs a reference block");
                return None;
            };
            let Some(k) = raw.k else {
                problems.push("exposure: subnetwork_iso needs K");
                return None;
            };
            if r.n > ISOMORPHISM_CAP {
                problems.push(format!("exposure.reference: {} units exceed the isomorphism cap {ISOMORPHISM_CAP}", r.n));
                return None;
            }
            let graph = problems.take(Network::from_external_edges(r.n, &r.edges), "exposure.reference.edges")?;
            let word = |s: &str, at: &str, problems: &mut Problems| {
                if s.len() != r.n {
                    problems.push(format!("{at}: {s:?} has length {}, expected {}", s.len(), r.n));
                    return None;
                }
                let w = SubWord::parse(s);
                if w.is_none() {
                    problems.push(format!("{at}: {s:?} must contain only 0 and 1"));
                }
                w
            };
            let target = word(&r.target, "exposure.reference.target", problems);
            let baseline = word(&r.baseline, "exposure.reference.baseline", problems);
            let ego = match r.ego {
                Some(0) => {
                    problems.push("exposure.reference.ego: units are 1-based");
                    return None;
                }
                e => e.map(|e| e - 1),
            };
            let reference = IsoReference::new(k, graph, target?, baseline?, ego);
            ExposureSpec::SubnetworkIso(problems.take(reference, "exposure.reference")?)
        }
        other => {
            problems.push(format!("exposure.kind: unknown kind {other:?}"));
            return None;
        }
    };
    if raw.reference.is_some() && !matches!(f, ExposureSpec::SubnetworkIso(_)) {
        problems.push("exposure.reference: only subnetwork_iso takes a reference");
    }
    Some(f)
}

fn build_rule(
    raw: Option<&RawSubpopulation>,
    f: &ExposureSpec,
    t: &Option<crate::exposures::ExposureValue>,
    n: usize,
    problems: &mut Problems,
) -> Option<SubpopulationRule> {
    Some(match raw {
        None => {
            // the neighbor-count default keeps units that can reach the count
            let gamma = match t {
                Some(crate::exposures::ExposureValue::Count { count, .. }) => Some(*count as usize),
                _ => None,
            };
            match (f, gamma) {
                (ExposureSpec::NeighborCount, Some(g)) if g > 0 => SubpopulationRule::Degree(g),
                _ => crate::exposures::default_rule(f, None),
            }
        }
        Some(RawSubpopulation::Named(s)) => match s.as_str() {
            "all" => SubpopulationRule::All,
            "at_least_one_neighbor" => SubpopulationRule::AtLeastOneNeighbor,
            "iso_class" => SubpopulationRule::IsoClass,
            other => {
                problems.push(format!("estimand.subpopulation: unknown rule {other:?}"));
                return None;
            }
        },
        Some(RawSubpopulation::Degree { degree }) => SubpopulationRule::Degree(*degree),
        Some(RawSubpopulation::Units(units)) => {
            if let Some(bad) = units.iter().find(|&&u| u == 0 || u > n) {
                problems.push(format!("estimand.subpopulation: unit {bad} outside 1..={n}"));
                return None;
            }
            SubpopulationRule::Explicit(units.iter().map(|u| u - 1).collect::<UnitSet>())
        }
    })
}

fn build_structural(raw: &RawStructural, net: Network, problems: &mut Problems) -> Option<OutcomeModel> {
    let fam = match raw.family.as_str() {
        "distance_decay" => {
            let base = raw.base.unwrap_or(0.5);
            if !base.is_finite() {
                problems.push("structural.base: must be finite");
                return None;
            }
            StructuralFamily::distance_decay(net, base)
        }
        "local_count" => {
            let radius = raw.radius.unwrap_or(1);
            let own = raw.own.unwrap_or(1.0);
            let peer = raw.peer.unwrap_or(1.0);
            let rows: Vec<u32> = (0..net.n()).map(|i| net.neighborhood(i, radius).mask() & !(1 << i)).collect();
            StructuralFamily::k_local(net, radius, move |_, i, d| {
                own * f64::from(u8::from(d.get(i))) + peer * f64::from((d.bits() & rows[i]).count_ones())
            })
        }
        other => {
            problems.push(format!("structural.family: unknown family {other:?}"));
            return None;
        }
    };
    let fam = match &raw.declared_gamma {
        Some(g) => problems.take(fam.with_declared_gamma(g.clone()), "structural.declared_gamma")?,
        None => fam,
    };
    Some(OutcomeModel::Structural(fam))
}

type BuiltLaw = (AssignmentLaw, Option<(SelectionGame, GameSolution)>);

fn build_law(
    raw: &RawMechanism,
    net: &Network,
    at: &str,
    problems: &mut Problems,
    cap: EnumerationCap,
) -> Option<BuiltLaw> {
    let n = net.n();
    let law = match raw.kind.as_str() {
        "complete" => {
            let Some(treated) = raw.treated else {
                problems.push(format!("{at}: complete randomization needs `treated`"));
                return None;
            };
            AssignmentLaw::CompleteRandomization { n, treated }
        }
        "bernoulli" => {
            let p = match &raw.p {
                Some(RawProbabilities::Shared(p)) => vec![*p; n],
                Some(RawProbabilities::PerUnit(p)) if p.len() == n => p.clone(),
                Some(RawProbabilities::PerUnit(p)) => {
                    problems.push(format!("{at}: {} probabilities for {n} units", p.len()));
                    return None;
                }
                None => {
                    problems.push(format!("{at}: bernoulli needs `p`"));
                    return None;
                }
            };
            AssignmentLaw::ProductBernoulli { p }
        }
        "explicit" => {
            let Some(rows) = &raw.rows else {
                problems.push(format!("{at}: explicit table needs `rows`"));
                return None;
            };
            let mut parsed = Vec::new();
            for (k, row) in rows.iter().enumerate() {
                let where_ = format!("{at}.rows[{}]", k + 1);
                if let Some(d) = parse_bits(&row.assignment, n, &where_, problems) {
                    parsed.push((d, row.prob));
                }
            }
            if parsed.len() != rows.len() {
                return None;
            }
            AssignmentLaw::Explicit(problems.take(Distribution::new(n, parsed), at)?)
        }
        "game" => {
            let types: Vec<Vec<TypeAtom>> = match &raw.types {
                Some(RawTypes::Shared(t)) => vec![t.iter().map(|a| TypeAtom { nu: a.nu, prob: a.prob }).collect(); n],
                Some(RawTypes::PerUnit(t)) => t
                    .iter()
                    .map(|u| u.iter().map(|a| TypeAtom { nu: a.nu, prob: a.prob }).collect())
                    .collect(),
                None => {
                    problems.push(format!("{at}: game needs `types`"));
                    return None;
                }
            };
            let utility = Utility::Linear {
                intercept: raw.intercept.unwrap_or(0.0),
                peer: raw.peer.unwrap_or(0.0),
            };
            let game = problems.take(SelectionGame::new(net.clone(), types, utility), at)?;
            let solution = problems.take(solve_incomplete_info_game(&game, cap), at)?;
            let law = solution.mechanism.clone();
            return Some((law, Some((game, solution))));
        }
        other => {
            problems.push(format!("{at}: unknown mechanism type {other:?}"));
            return None;
        }
    };
    problems.take(law.validate(), at)?;
    Some((law, None))
}
