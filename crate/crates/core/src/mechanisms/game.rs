use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::AssignmentLaw;
use crate::error::{Error, Result};
use crate::netcore::{Assignment, EnumerationCap, Network};
use crate::outcomes::EXACT_TOL;

/// A private type `nu` with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeAtom {
    pub nu: f64,
    pub prob: f64,
}

pub type UtilityFn = dyn Fn(usize, Assignment, f64) -> f64 + Send + Sync;

/// Realized utility `U_i(d_{-i}, nu_i)` of adopting, with the context's
/// controls fixed.
#[derive(Clone)]
pub enum Utility {
    /// `intercept + peer * (treated neighbors) + nu`.
    Linear { intercept: f64, peer: f64 },
    /// Arbitrary `U(i, d, nu)`; the ego's own bit of `d` is always zero.
    Custom(Arc<UtilityFn>),
}

impl fmt::Debug for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Utility::Linear { intercept, peer } => {
                f.debug_struct("Linear").field("intercept", intercept).field("peer", peer).finish()
            }
            Utility::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Incomplete-information take-up game for one context. Types are
/// independent across units.
#[derive(Debug, Clone)]
pub struct SelectionGame {
    net: Network,
    types: Vec<Vec<TypeAtom>>,
    utility: Utility,
}

/// Pure strategy profile: `profile[i][k]` is unit `i`'s action at its
/// `k`-th type.
pub type Profile = Vec<Vec<bool>>;

impl SelectionGame {
    pub fn new(net: Network, types: Vec<Vec<TypeAtom>>, utility: Utility) -> Result<Self> {
        if types.len() != net.n() {
            return Err(Error::SizeMismatch {
                left: net.n(),
                right: types.len(),
            });
        }
        for (i, support) in types.iter().enumerate() {
            if support.is_empty() {
                return Err(Error::Precondition(format!("unit {} has no types", i + 1)));
            }
            if support.iter().any(|a| !a.nu.is_finite() || !a.prob.is_finite() || a.prob < 0.0) {
                return Err(Error::Precondition(format!("unit {} has an invalid type", i + 1)));
            }
            let total: f64 = support.iter().map(|a| a.prob).sum();
            if (total - 1.0).abs() > EXACT_TOL {
                return Err(Error::Precondition(format!(
                    "type probabilities of unit {} sum to {total}",
                    i + 1
                )));
            }
        }
        if let Utility::Linear { intercept, peer } = utility {
            if !intercept.is_finite() || !peer.is_finite() {
                return Err(Error::Precondition("utility coefficients must be finite".into()));
            }
        }
        Ok(SelectionGame { net, types, utility })
    }

    /// Same type support for every unit.
    pub fn symmetric(net: Network, types: Vec<TypeAtom>, utility: Utility) -> Result<Self> {
        let n = net.n();
        SelectionGame::new(net, vec![types; n], utility)
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn types(&self) -> &[Vec<TypeAtom>] {
        &self.types
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    /// Adoption probability of each unit under `profile`.
    pub fn adoption(&self, profile: &Profile) -> Vec<f64> {
        self.types
            .iter()
            .zip(profile)
            .map(|(support, acts)| support.iter().zip(acts).filter(|(_, &a)| a).map(|(t, _)| t.prob).sum())
            .collect()
    }

    /// `E[U_i(D_{-i}, nu) | nu_i = nu]` when opponents adopt independently
    /// with probabilities `q`.
    pub fn expected_utility(&self, i: usize, nu: f64, q: &[f64]) -> Result<f64> {
        let value = match &self.utility {
            Utility::Linear { intercept, peer } => {
                intercept + peer * self.net.neighbors(i).iter().map(|j| q[j]).sum::<f64>() + nu
            }
            Utility::Custom(u) => {
                let n = self.n();
                let others = crate::netcore::UnitSet::singleton(i).complement(n);
                let mut acc = 0.0;
                for x in others.submasks() {
                    let d = Assignment::new(x, n);
                    let w: f64 = others.iter().map(|j| if d.get(j) { q[j] } else { 1.0 - q[j] }).product();
                    if w > 0.0 {
                        acc += w * u(i, d, nu);
                    }
                }
                acc
            }
        };
        if !value.is_finite() {
            return Err(Error::Precondition(format!("utility of unit {} is not finite", i + 1)));
        }
        Ok(value)
    }

    /// Simultaneous best response to `profile`; ties mean no adoption.
    pub fn best_response(&self, profile: &Profile) -> Result<Profile> {
        let q = self.adoption(profile);
        (0..self.n())
            .map(|i| {
                self.types[i]
                    .iter()
                    .map(|t| Ok(self.expected_utility(i, t.nu, &q)? > 0.0))
                    .collect()
            })
            .collect()
    }

    pub fn is_equilibrium(&self, profile: &Profile) -> Result<bool> {
        Ok(self.best_response(profile)? == *profile)
    }

    fn constant_profile(&self, action: bool) -> Profile {
        self.types.iter().map(|s| vec![action; s.len()]).collect()
    }

    fn iterate_from(&self, start: Profile) -> Result<std::result::Result<Profile, usize>> {
        let mut seen: Vec<Profile> = vec![start.clone()];
        let mut index: HashSet<Profile> = HashSet::from([start.clone()]);
        let mut current = start;
        loop {
            let next = self.best_response(&current)?;
            if next == current {
                return Ok(Ok(current));
            }
            if !index.insert(next.clone()) {
                let first = seen.iter().position(|p| *p == next).unwrap_or(0);
                return Ok(Err(seen.len() - first));
            }
            seen.push(next.clone());
            current = next;
        }
    }
}

/// A solved game: the equilibrium from the all-zero start, its induced
/// assignment law, and a second equilibrium if the all-ones start finds
/// one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSolution {
    pub profile: Profile,
    pub mechanism: AssignmentLaw,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiple_equilibria: Option<Profile>,
}

/// Synchronous best-response iteration from the all-zero profile with
/// cycle detection.
pub fn solve_incomplete_info_game(g: &SelectionGame, cap: EnumerationCap) -> Result<GameSolution> {
    cap.check(g.n())?;
    let profile = g
        .iterate_from(g.constant_profile(false))?
        .map_err(|period| Error::NoConvergence { period })?;
    let multiple_equilibria = match g.iterate_from(g.constant_profile(true))? {
        Ok(other) if other != profile => Some(other),
        _ => None,
    };
    let marginals = g.adoption(&profile);
    Ok(GameSolution {
        profile,
        mechanism: AssignmentLaw::GameInduced { marginals },
        multiple_equilibria,
    })
}
