use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_sign_preservation, ComparisonKind, EstimandSpec, Problem, SignVerdict};
use crate::error::{Error, Result};
use crate::exposures::{default_rule, subpopulation, ExposureSpec, ExposureValue, SubpopulationRule};
use crate::mechanisms::{AssignmentLaw, Distribution, Mechanism};
use crate::netcore::{Assignment, EnumerationCap, Network};
use crate::outcomes::{ContextSet, OutcomeTable};

/// Network drawn for each candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkFamily {
    Complete,
    Path,
    Cycle,
    Star,
    Empty,
    /// Each link present independently with this probability.
    Random { edge_prob: f64 },
}

/// Mechanism drawn for each candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanismFamily {
    /// Independent treatment, probabilities uniform in `[lo, hi]`; one
    /// probability for all units unless `heterogeneous`.
    Bernoulli {
        lo: f64,
        hi: f64,
        #[serde(default)]
        heterogeneous: bool,
    },
    /// Exactly `m` treated, `m` uniform in `1..n`.
    Complete,
    /// Random weights on between 2 and `max_support` distinct assignments.
    Explicit { max_support: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub exposure: ExposureSpec,
    pub t: ExposureValue,
    pub t_prime: ExposureValue,
    pub kind: ComparisonKind,
    pub n_min: usize,
    pub n_max: usize,
    pub network: NetworkFamily,
    pub mechanism: MechanismFamily,
    /// Outcome values, or increments when `monotone`.
    pub values: Vec<f64>,
    /// Outcomes weakly increasing in every coordinate of `d`.
    pub monotone: bool,
    pub subpopulation: Option<SubpopulationRule>,
    pub seed: u64,
    pub budget: u64,
    pub max_found: usize,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.budget == 0 {
            problems.push("budget must be positive".to_string());
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            problems.push(format!("invalid size range {}..={}", self.n_min, self.n_max));
        }
        if self.n_max > 10 {
            problems.push(format!("n_max = {} is too large for search", self.n_max));
        }
        if self.values.is_empty() || self.values.iter().any(|v| !v.is_finite()) {
            problems.push("value grid must be non-empty and finite".into());
        }
        if self.monotone && self.values.iter().any(|&v| v < 0.0) {
            problems.push("monotone search needs non-negative increments".into());
        }
        if matches!(self.exposure, ExposureSpec::SubnetworkIso(_)) {
            problems.push("search does not support subnetwork exposures".into());
        }
        if self.t == self.t_prime {
            problems.push("t and t' coincide".into());
        }
        if self.max_found == 0 {
            problems.push("max_found must be positive".into());
        }
        match &self.mechanism {
            MechanismFamily::Bernoulli { lo, hi, .. } if !(0.0 < *lo && lo <= hi && *hi < 1.0) => {
                problems.push(format!("Bernoulli range [{lo}, {hi}] must lie inside (0, 1)"))
            }
            MechanismFamily::Explicit { max_support } if *max_support < 2 => {
                problems.push("explicit support must allow at least 2 assignments".into())
            }
            _ => {}
        }
        if let NetworkFamily::Random { edge_prob } = self.network {
            if !(0.0..=1.0).contains(&edge_prob) {
                problems.push(format!("edge probability {edge_prob} outside [0, 1]"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// A fully specified scenario produced by the search.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub index: u64,
    pub net: Network,
    pub outcomes: OutcomeTable,
    pub law: AssignmentLaw,
    pub spec: EstimandSpec,
}

impl Candidate {
    pub fn evaluate(&self, kind: ComparisonKind) -> Result<SignVerdict> {
        let contexts = ContextSet::single();
        let mech = Mechanism::new(vec![self.law.clone()])?;
        let p = Problem::new(&self.net, &contexts, &self.outcomes, &mech, &self.spec)?;
        check_sign_preservation(kind, &p)
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub candidate: Candidate,
    pub verdict: SignVerdict,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub found: Vec<Counterexample>,
    pub evaluated: u64,
    /// Candidates skipped because an event had zero mass or the
    /// subpopulation was empty.
    pub skipped: u64,
}

const CHUNK: u64 = 2048;

/// Deterministic randomized search for sign-preservation violations.
/// Candidate `k` is generated from its own stream of the seeded
/// generator, so results depend only on the configuration.
pub fn search_reversals(config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let mut found = Vec::new();
    let mut evaluated = 0;
    let mut skipped = 0;
    let mut start = 0;
    while start < config.budget && found.len() < config.max_found {
        let end = (start + CHUNK).min(config.budget);
        let results: Vec<(u64, Option<Counterexample>, bool)> = (start..end)
            .into_par_iter()
            .map(|k| match candidate(config, k) {
                None => (k, None, true),
                Some(c) => match c.evaluate(config.kind) {
                    Ok(v) if v.is_violation() => (k, Some(Counterexample { candidate: c, verdict: v }), false),
                    Ok(_) => (k, None, false),
                    Err(_) => (k, None, true),
                },
            })
            .collect();
        for (k, hit, skip) in results {
            evaluated += 1;
            skipped += u64::from(skip);
            if let Some(hit) = hit {
                if found.len() < config.max_found && reverify(config, k) {
                    found.push(hit);
                }
            }
        }
        start = end;
    }
    Ok(SearchOutcome {
        found,
        evaluated,
        skipped,
    })
}

/// Rebuilds candidate `k` from scratch and evaluates it again.
fn reverify(config: &SearchConfig, k: u64) -> bool {
    candidate(config, k)
        .and_then(|c| c.evaluate(config.kind).ok())
        .is_some_and(|v| v.is_violation())
}

/// Generates candidate `k`, or `None` when it cannot be posed.
pub fn candidate(config: &SearchConfig, k: u64) -> Option<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(k);
    let n = rng.gen_range(config.n_min..=config.n_max);
    let net = random_network(&config.network, n, &mut rng)?;
    let outcomes = random_outcomes(n, &config.values, config.monotone, &mut rng);
    let law = random_law(&config.mechanism, n, &mut rng);
    let rule = config
        .subpopulation
        .clone()
        .unwrap_or_else(|| default_rule(&config.exposure, None));
    let subpop = subpopulation(&config.exposure, &net, &rule).ok()?.units;
    let spec = EstimandSpec::new(config.exposure.clone(), config.t, config.t_prime, subpop).ok()?;
    EnumerationCap::MAX.check(n).ok()?;
    Some(Candidate {
        index: k,
        net,
        outcomes,
        law,
        spec,
    })
}

fn random_network(family: &NetworkFamily, n: usize, rng: &mut ChaCha8Rng) -> Option<Network> {
    match family {
        NetworkFamily::Complete => Network::complete(n).ok(),
        NetworkFamily::Path => Network::path(n).ok(),
        NetworkFamily::Cycle => Network::cycle(n).ok(),
        NetworkFamily::Star => Network::star(n.checked_sub(1)?).ok(),
        NetworkFamily::Empty => Network::empty(n).ok(),
        NetworkFamily::Random { edge_prob } => {
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(*edge_prob) {
                        edges.push((a, b));
                    }
                }
            }
            Network::from_edges(n, &edges).ok()
        }
    }
}

/// Random table over every cell. Monotone tables add a non-negative
/// increment to the largest value among immediate predecessors, visiting
/// assignments in increasing numeric order.
fn random_outcomes(n: usize, values: &[f64], monotone: bool, rng: &mut ChaCha8Rng) -> OutcomeTable {
    let mut t = OutcomeTable::new(n, 1, None);
    for i in 0..n {
        let mut column = vec![0.0; 1 << n];
        for d in Assignment::all(n) {
            let draw = *values.choose(rng).expect("non-empty grid");
            column[d.bits() as usize] = if monotone {
                let floor = d
                    .treated()
                    .iter()
                    .map(|j| column[(d.bits() & !(1 << j)) as usize])
                    .fold(0.0, f64::max);
                floor + draw
            } else {
                draw
            };
        }
        for d in Assignment::all(n) {
            t.set(0, i, d, column[d.bits() as usize]).expect("finite grid value");
        }
    }
    t
}

fn random_law(family: &MechanismFamily, n: usize, rng: &mut ChaCha8Rng) -> AssignmentLaw {
    match *family {
        MechanismFamily::Bernoulli { lo, hi, heterogeneous } => {
            let shared = rng.gen_range(lo..=hi);
            AssignmentLaw::ProductBernoulli {
                p: (0..n)
                    .map(|_| if heterogeneous { rng.gen_range(lo..=hi) } else { shared })
                    .collect(),
            }
        }
        MechanismFamily::Complete => AssignmentLaw::CompleteRandomization {
            n,
            treated: if n > 1 { rng.gen_range(1..n) } else { 1 },
        },
        MechanismFamily::Explicit { max_support } => {
            let cells = 1usize << n;
            let size = rng.gen_range(2..=max_support.min(cells).max(2));
            let mut all: Vec<u32> = (0..cells as u32).collect();
            let (support, _) = all.partial_shuffle(rng, size.min(cells));
            let weights: Vec<f64> = support.iter().map(|_| f64::from(rng.gen_range(1u8..=4))).collect();
            let total: f64 = weights.iter().sum();
            let rows = support
                .iter()
                .zip(&weights)
                .map(|(&b, &w)| (Assignment::new(b, n), w / total))
                .collect();
            AssignmentLaw::Explicit(Distribution::new(n, rows).expect("normalized weights"))
        }
    }
}
