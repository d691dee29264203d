//! Configuration files for the coupling experiment and the reversal
//! search, and the scenario text emitted for search hits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::format::*;
use crate::error::{Error, Result};
use crate::estimands::{
    search_reversals, ComparisonKind, Counterexample, MechanismFamily, NetworkFamily, SearchConfig, SearchOutcome,
};
use crate::exposures::{ExposureSpec, SubpopulationRule};
use crate::mechanisms::{coupling_gap, exact_coupling_law, sample_coupled_pair, AssignmentLaw, CouplingGap, CouplingSpec};
use crate::netcore::{Assignment, EnumerationCap, Network};
use crate::outcomes::{PotentialOutcomes, EXACT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingGraph {
    Star,
    Clique,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: CouplingGraph,
    /// Ego degrees to try.
    pub gamma: Vec<usize>,
}

/// `coupling-test` configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub graphs: Vec<GraphSpec>,
    pub p: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Ego treatment; both values when absent.
    #[serde(default)]
    pub d: Option<bool>,
    /// Extra units hanging off the first neighbor, outside the ego's
    /// neighborhood.
    #[serde(default)]
    pub outside: usize,
    /// When set, also reports the gap for unequal probabilities
    /// `p +- spread` alternating over units.
    #[serde(default)]
    pub heterogeneous_spread: Option<f64>,
}

fn default_samples() -> u64 {
    100_000
}

impl CouplingConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CouplingConfig = toml::from_str(text).map_err(|e| Error::Parse(format!("coupling config: {e}")))?;
        let mut problems = Vec::new();
        if cfg.graphs.is_empty() {
            problems.push("graphs: at least one graph is required".to_string());
        }
        for (k, g) in cfg.graphs.iter().enumerate() {
            if let Some(bad) = g.gamma.iter().find(|&&x| !(2..=12).contains(&x)) {
                problems.push(format!("graphs[{}]: gamma {bad} outside 2..=12", k + 1));
            }
        }
        if let Some(bad) = cfg.p.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            problems.push(format!("p: {bad} outside (0, 1)"));
        }
        if cfg.p.is_empty() {
            problems.push("p: at least one probability is required".into());
        }
        if cfg.heterogeneous_spread.is_some_and(|s| !(0.0..0.5).contains(&s)) {
            problems.push("heterogeneous_spread: must lie in [0, 0.5)".into());
        }
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(problems))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingRow {
    pub graph: CouplingGraph,
    pub gamma: usize,
    pub d: bool,
    pub tau_hi: usize,
    pub tau_lo: usize,
    pub p: f64,
    pub tv_low: f64,
    pub tv_high: f64,
    pub samples: u64,
    pub order_violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heterogeneous: Option<CouplingGap>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub rows: Vec<CouplingRow>,
    pub max_tv: f64,
    pub total_samples: u64,
    pub order_violations: u64,
    /// Exact marginals match and no sampled pair broke the order.
    pub passed: bool,
}

/// Ego is unit 1 with `gamma` neighbors; `outside` further units form a
/// path hanging off the first neighbor.
pub fn coupling_network(kind: CouplingGraph, gamma: usize, outside: usize) -> Result<Network> {
    let core = gamma + 1;
    let mut edges = Vec::new();
    for a in 0..core {
        for b in a + 1..core {
            if a == 0 || kind == CouplingGraph::Clique {
                edges.push((a, b));
            }
        }
    }
    let mut prev = 1;
    for k in 0..outside {
        edges.push((prev, core + k));
        prev = core + k;
    }
    Network::from_edges(core + outside, &edges)
}

pub fn run_coupling(cfg: &CouplingConfig) -> Result<CouplingReport> {
    let mut configs = Vec::new();
    for g in &cfg.graphs {
        for &gamma in &g.gamma {
            for tau_hi in 2..=gamma {
                for tau_lo in 1..tau_hi {
                    for &p in &cfg.p {
                        for d in cfg.d.map_or(vec![false, true], |d| vec![d]) {
                            configs.push((g.kind, gamma, tau_hi, tau_lo, p, d));
                        }
                    }
                }
            }
        }
    }
    let per = cfg.samples.div_ceil(configs.len().max(1) as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for (graph, gamma, tau_hi, tau_lo, p, d) in configs {
        let net = coupling_network(graph, gamma, cfg.outside)?;
        let spec = CouplingSpec { ego: 0, d, tau_hi, tau_lo };
        let gap = coupling_gap(&net, spec, &vec![p; net.n()], EnumerationCap::MAX)?;
        // the exact joint must itself respect the order
        let exact = exact_coupling_law(&net, spec, p, EnumerationCap::MAX)?;
        let mut order_violations = exact.joint.iter().filter(|(pair, _)| !pair.high.dominates(pair.low)).count() as u64;
        let nbrs = net.neighbors(0);
        for _ in 0..per {
            let pair = sample_coupled_pair(&net, spec, p, &mut rng)?;
            let ok = pair.high.dominates(pair.low)
                && pair.low.count_in(nbrs) == tau_lo
                && pair.high.count_in(nbrs) == tau_hi
                && pair.low.get(0) == d
                && pair.high.get(0) == d;
            order_violations += u64::from(!ok);
        }
        let heterogeneous = match cfg.heterogeneous_spread {
            Some(s) => {
                let probs: Vec<f64> = (0..net.n())
                    .map(|j| if j % 2 == 0 { p + s } else { p - s }.clamp(0.01, 0.99))
                    .collect();
                Some(coupling_gap(&net, spec, &probs, EnumerationCap::MAX)?)
            }
            None => None,
        };
        rows.push(CouplingRow {
            graph,
            gamma,
            d,
            tau_hi,
            tau_lo,
            p,
            tv_low: gap.tv_low,
            tv_high: gap.tv_high,
            samples: per,
            order_violations,
            heterogeneous,
        });
    }
    let max_tv = rows.iter().map(|r| r.tv_low.max(r.tv_high)).fold(0.0, f64::max);
    let total_samples = rows.iter().map(|r| r.samples).sum();
    let order_violations = rows.iter().map(|r| r.order_violations).sum();
    Ok(CouplingReport {
        passed: max_tv <= EXACT_TOL && order_violations == 0,
        rows,
        max_tv,
        total_samples,
        order_violations,
    })
}

/// `search` configuration as written in TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSearchConfig {
    pub exposure: String,
    pub t: String,
    pub t_prime: String,
    pub kind: String,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    pub n_max: usize,
    pub network: NetworkFamily,
    pub mechanism: MechanismFamily,
    pub values: Vec<f64>,
    #[serde(default)]
    pub monotone: bool,
    #[serde(default)]
    pub subpopulation: Option<RawSubpopulation>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_max_found")]
    pub max_found: usize,
}

fn default_n_min() -> usize {
    2
}

fn default_budget() -> u64 {
    100_000
}

fn default_max_found() -> usize {
    1
}

/// Parses a search configuration; `budget` and `max_n` override the file.
pub fn parse_search_config(text: &str, seed: Option<u64>, budget: Option<u64>, max_n: Option<usize>) -> Result<SearchConfig> {
    let raw: RawSearchConfig = toml::from_str(text).map_err(|e| Error::Parse(format!("search config: {e}")))?;
    let mut problems = Vec::new();
    let exposure = match raw.exposure.as_str() {
        "dim" => Some(ExposureSpec::Dim),
        "any_treated_neighbor" => Some(ExposureSpec::AnyTreatedNeighbor),
        "neighbor_count" => Some(ExposureSpec::NeighborCount),
        "fraction_treated" => Some(ExposureSpec::FractionTreated),
        other => {
            problems.push(format!("exposure: unsupported kind {other:?}"));
            None
        }
    };
    let kind = raw.kind.parse::<ComparisonKind>().map_err(|e| problems.push(format!("kind: {e}"))).ok();
    let subpopulation = match &raw.subpopulation {
        None => None,
        Some(RawSubpopulation::Named(s)) => match s.as_str() {
            "all" => Some(SubpopulationRule::All),
            "at_least_one_neighbor" => Some(SubpopulationRule::AtLeastOneNeighbor),
            other => {
                problems.push(format!("subpopulation: unsupported rule {other:?}"));
                None
            }
        },
        Some(RawSubpopulation::Degree { degree }) => Some(SubpopulationRule::Degree(*degree)),
        Some(RawSubpopulation::Units(_)) => {
            problems.push("subpopulation: explicit unit lists are not supported in search".into());
            None
        }
    };
    let (t, t_prime) = match &exposure {
        Some(f) => {
            let t = f.parse_value(&raw.t);
            let tp = f.parse_value(&raw.t_prime);
            if t.is_none() {
                problems.push(format!("t: {:?} is not a value of the {f} exposure", raw.t));
            }
            if tp.is_none() {
                problems.push(format!("t_prime: {:?} is not a value of the {f} exposure", raw.t_prime));
            }
            (t, tp)
        }
        None => (None, None),
    };
    let n_max = max_n.map_or(raw.n_max, |m| raw.n_max.min(m));
    match (exposure, kind, t, t_prime, problems.is_empty()) {
        (Some(exposure), Some(kind), Some(t), Some(t_prime), true) => {
            let cfg = SearchConfig {
                exposure,
                t,
                t_prime,
                kind,
                n_min: raw.n_min,
                n_max,
                network: raw.network,
                mechanism: raw.mechanism,
                values: raw.values,
                monotone: raw.monotone,
                subpopulation,
                seed: seed.unwrap_or(raw.seed),
                budget: budget.unwrap_or(raw.budget),
                max_found: raw.max_found,
            };
            cfg.validate()?;
            Ok(cfg)
        }
        _ => Err(Error::Validation(problems)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub index: u64,
    pub n: usize,
    pub tau: f64,
    pub premise: &'static str,
    /// The counterexample as scenario text.
    pub scenario: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub kind: ComparisonKind,
    pub seed: u64,
    pub budget: u64,
    pub evaluated: u64,
    pub skipped: u64,
    pub found: Vec<SearchHit>,
}

pub fn run_search(cfg: &SearchConfig) -> Result<SearchReport> {
    let SearchOutcome { found, evaluated, skipped } = search_reversals(cfg)?;
    let found = found
        .iter()
        .map(|c| {
            Ok(SearchHit {
                index: c.candidate.index,
                n: c.candidate.net.n(),
                tau: c.verdict.tau,
                premise: c.verdict.premise.label(),
                scenario: counterexample_text(cfg, c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchReport {
        kind: cfg.kind,
        seed: cfg.seed,
        budget: cfg.budget,
        evaluated,
        skipped,
        found,
    })
}

fn bits(d: Assignment) -> String {
    d.to_string()
}

/// Renders a search hit as a self-contained scenario file.
pub fn counterexample_text(cfg: &SearchConfig, c: &Counterexample) -> Result<String> {
    let cand = &c.candidate;
    let n = cand.net.n();
    let mechanism = match &cand.law {
        AssignmentLaw::ProductBernoulli { p } => RawMechanism {
            kind: "bernoulli".into(),
            p: Some(RawProbabilities::PerUnit(p.clone())),
            ..Default::default()
        },
        AssignmentLaw::CompleteRandomization { treated, .. } => RawMechanism {
            kind: "complete".into(),
            treated: Some(*treated),
            ..Default::default()
        },
        law => RawMechanism {
            kind: "explicit".into(),
            rows: Some(
                law.atoms()
                    .into_iter()
                    .map(|(d, prob)| RawRow { assignment: bits(d), prob })
                    .collect(),
            ),
            ..Default::default()
        },
    };
    let outcomes = Assignment::all(n)
        .map(|d| {
            let values = (0..n).map(|i| cand.outcomes.mean_outcome(0, i, d)).collect::<Result<Vec<_>>>()?;
            Ok(RawOutcome {
                context: None,
                assignment: bits(d),
                unit: None,
                value: None,
                values: Some(values),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = RawScenario {
        name: Some(format!("search-{}-{}", cfg.seed, cand.index)),
        n,
        edges: cand.net.edges().iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
        seed: Some(cfg.seed),
        checks: vec![format!("sign_{}", cfg.kind)],
        exposure: RawExposure {
            kind: cfg.exposure.kind_name().into(),
            ..Default::default()
        },
        estimand: RawEstimand {
            t: cand.spec.t.to_string(),
            t_prime: cand.spec.t_prime.to_string(),
            subpopulation: Some(RawSubpopulation::Units(cand.spec.subpop.external())),
        },
        mechanism: Some(mechanism),
        outcomes,
        ..Default::default()
    };
    toml::to_string(&raw).map_err(|e| Error::Parse(format!("cannot render scenario: {e}")))
}
