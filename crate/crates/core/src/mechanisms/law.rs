use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netcore::{Assignment, UnitSet};
use crate::outcomes::EXACT_TOL;

/// Finite distribution over `{0,1}^n`, stored as its support sorted by
/// assignment bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    n: usize,
    atoms: Vec<(Assignment, f64)>,
}

impl Distribution {
    /// Validates non-negativity and normalization; merges duplicate rows
    /// and drops zero-mass atoms.
    pub fn new(n: usize, rows: Vec<(Assignment, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<u32, f64> = BTreeMap::new();
        for (d, p) in rows {
            if d.n() != n {
                return Err(Error::SizeMismatch { left: n, right: d.n() });
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Precondition(format!("probability {p} for {d} is invalid")));
            }
            *merged.entry(d.bits()).or_default() += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::Precondition(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Distribution::from_sorted(
            n,
            merged
                .into_iter()
                .filter(|&(_, p)| p > 0.0)
                .map(|(b, p)| (Assignment::new(b, n), p))
                .collect(),
        ))
    }

    pub(crate) fn from_sorted(n: usize, atoms: Vec<(Assignment, f64)>) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0].0.bits() < w[1].0.bits()));
        Distribution { n, atoms }
    }

    pub fn point(d: Assignment) -> Self {
        Distribution {
            n: d.n(),
            atoms: vec![(d, 1.0)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[(Assignment, f64)] {
        &self.atoms
    }

    pub fn prob(&self, d: Assignment) -> f64 {
        self.atoms
            .binary_search_by_key(&d.bits(), |(a, _)| a.bits())
            .map(|k| self.atoms[k].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    /// Law of the projection onto `set`, keyed by the masked bits.
    pub fn marginal(&self, set: UnitSet) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for &(d, p) in &self.atoms {
            *out.entry(d.bits() & set.mask()).or_default() += p;
        }
        out
    }

    /// Total-variation distance `1/2 * sum |p - q|`.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for &(d, p) in &self.atoms {
            *acc.entry(d.bits()).or_default() += p;
        }
        for &(d, q) in &other.atoms {
            *acc.entry(d.bits()).or_default() -= q;
        }
        0.5 * acc.values().map(|x| x.abs()).sum::<f64>()
    }
}

/// An assignment mechanism for one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AssignmentLaw {
    Explicit(Distribution),
    /// Independent `Bernoulli(p_j)` per unit.
    ProductBernoulli { p: Vec<f64> },
    /// Uniform over vectors with exactly `treated` of `n` units treated.
    CompleteRandomization { n: usize, treated: usize },
    /// Pushforward of independent private types through an equilibrium
    /// strategy profile; a product law with the given marginals.
    GameInduced { marginals: Vec<f64> },
}

impl AssignmentLaw {
    pub fn bernoulli(n: usize, p: f64) -> Self {
        AssignmentLaw::ProductBernoulli { p: vec![p; n] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AssignmentLaw::Explicit(dist) => {
                let total = dist.total();
                if (total - 1.0).abs() > EXACT_TOL {
                    return Err(Error::Precondition(format!("probabilities sum to {total}, expected 1")));
                }
                Ok(())
            }
            AssignmentLaw::ProductBernoulli { p } | AssignmentLaw::GameInduced { marginals: p } => {
                if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(Error::Precondition(format!("Bernoulli probability {bad} outside [0, 1]")));
                }
                Ok(())
            }
            AssignmentLaw::CompleteRandomization { n, treated } => {
                if treated > n {
                    return Err(Error::Precondition(format!("cannot treat {treated} of {n} units")));
                }
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AssignmentLaw::Explicit(d) => d.n(),
            AssignmentLaw::ProductBernoulli { p } | AssignmentLaw::GameInduced { marginals: p } => p.len(),
            AssignmentLaw::CompleteRandomization { n, .. } => *n,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            AssignmentLaw::Explicit(_) => "explicit",
            AssignmentLaw::ProductBernoulli { .. } => "bernoulli",
            AssignmentLaw::CompleteRandomization { .. } => "complete",
            AssignmentLaw::GameInduced { .. } => "game",
        }
    }

    /// Exact mass of `d`.
    pub fn prob(&self, d: Assignment) -> f64 {
        match self {
            AssignmentLaw::Explicit(dist) => dist.prob(d),
            AssignmentLaw::ProductBernoulli { p } | AssignmentLaw::GameInduced { marginals: p } => {
                product_prob(p, d)
            }
            AssignmentLaw::CompleteRandomization { n, treated } => {
                if d.count() == *treated {
                    1.0 / binomial(*n, *treated)
                } else {
                    0.0
                }
            }
        }
    }

    /// Support of the law with masses, in increasing assignment order.
    pub fn atoms(&self) -> Vec<(Assignment, f64)> {
        let n = self.n();
        match self {
            AssignmentLaw::Explicit(dist) => dist.atoms().to_vec(),
            AssignmentLaw::ProductBernoulli { p } | AssignmentLaw::GameInduced { marginals: p } => {
                let forced: u32 = p.iter().enumerate().filter(|(_, &x)| x >= 1.0).map(|(j, _)| 1 << j).sum();
                let free: u32 = p
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0.0 && x < 1.0)
                    .map(|(j, _)| 1 << j)
                    .sum();
                let mut out: Vec<(Assignment, f64)> = UnitSet::from_mask(free)
                    .submasks()
                    .map(|x| {
                        let d = Assignment::new(x | forced, n);
                        (d, product_prob(p, d))
                    })
                    .collect();
                out.sort_by_key(|(d, _)| d.bits());
                out
            }
            AssignmentLaw::CompleteRandomization { treated, .. } => {
                let mass = 1.0 / binomial(n, *treated);
                Assignment::all(n)
                    .filter(|d| d.count() == *treated)
                    .map(|d| (d, mass))
                    .collect()
            }
        }
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::from_sorted(self.n(), self.atoms())
    }

    /// Per-unit treatment probabilities `P(D_j = 1)`.
    pub fn marginals(&self) -> Vec<f64> {
        match self {
            AssignmentLaw::ProductBernoulli { p } | AssignmentLaw::GameInduced { marginals: p } => p.clone(),
            AssignmentLaw::CompleteRandomization { n, treated } => vec![*treated as f64 / *n as f64; *n],
            AssignmentLaw::Explicit(dist) => {
                let mut m = vec![0.0; dist.n()];
                for &(d, p) in dist.atoms() {
                    for j in d.treated().iter() {
                        m[j] += p;
                    }
                }
                m
            }
        }
    }
}

pub(crate) fn product_prob(p: &[f64], d: Assignment) -> f64 {
    p.iter()
        .enumerate()
        .map(|(j, &pj)| if d.get(j) { pj } else { 1.0 - pj })
        .product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// One assignment law per context, indexed like the context set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Mechanism {
    laws: Vec<AssignmentLaw>,
}

impl Mechanism {
    pub fn new(laws: Vec<AssignmentLaw>) -> Result<Self> {
        if laws.is_empty() {
            return Err(Error::Precondition("mechanism needs at least one context law".into()));
        }
        let n = laws[0].n();
        for law in &laws {
            law.validate()?;
            if law.n() != n {
                return Err(Error::SizeMismatch { left: n, right: law.n() });
            }
        }
        Ok(Mechanism { laws })
    }

    /// The same law in each of `contexts` contexts.
    pub fn shared(law: AssignmentLaw, contexts: usize) -> Result<Self> {
        Mechanism::new(vec![law; contexts.max(1)])
    }

    pub fn law(&self, context: usize) -> &AssignmentLaw {
        &self.laws[context]
    }

    pub fn laws(&self) -> &[AssignmentLaw] {
        &self.laws
    }

    pub fn n(&self) -> usize {
        self.laws[0].n()
    }

    pub fn contexts(&self) -> usize {
        self.laws.len()
    }

    /// `P(D = d | c)`.
    pub fn prob(&self, context: usize, d: Assignment) -> f64 {
        self.laws[context].prob(d)
    }
}
