use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{ContextSet, PotentialOutcomes};
use crate::error::{Error, Result};
use crate::netcore::{Assignment, EnumerationCap, Network, UnitSet};

/// What a structural evaluator sees: the units kept in the model, the ego,
/// and the assignment with every excluded unit zeroed.
#[derive(Debug, Clone, Copy)]
pub struct Restriction<'a> {
    pub net: &'a Network,
    pub members: UnitSet,
    pub unit: usize,
    pub assignment: Assignment,
    pub context: usize,
}

pub type Evaluator = dyn Fn(&Restriction<'_>) -> std::result::Result<f64, String> + Send + Sync;

/// A structural outcome family `g_{|S|}` evaluable on any unit set `S`
/// containing the ego, with an optional declared decay schedule indexed
/// by radius.
#[derive(Clone)]
pub struct StructuralFamily {
    name: String,
    net: Network,
    evaluator: Arc<Evaluator>,
    declared_gamma: Option<Vec<f64>>,
}

impl fmt::Debug for StructuralFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructuralFamily")
            .field("name", &self.name)
            .field("n", &self.net.n())
            .field("declared_gamma", &self.declared_gamma)
            .finish()
    }
}

impl StructuralFamily {
    pub fn new(
        name: impl Into<String>,
        net: Network,
        evaluator: impl Fn(&Restriction<'_>) -> std::result::Result<f64, String> + Send + Sync + 'static,
    ) -> Self {
        StructuralFamily {
            name: name.into(),
            net,
            evaluator: Arc::new(evaluator),
            declared_gamma: None,
        }
    }

    /// `g_S(i, d) = sum over j in S of base^dist_S(i, j) * d_j`, with
    /// distances taken inside the subnetwork induced on `S`.
    pub fn distance_decay(net: Network, base: f64) -> Self {
        StructuralFamily::new(format!("distance_decay({base})"), net, move |r| {
            let dist = restricted_distances(r.net, r.members, r.unit);
            Ok(r.members
                .iter()
                .filter(|&j| r.assignment.get(j))
                .filter_map(|j| dist[j].map(|k| base.powi(k as i32)))
                .sum())
        })
    }

    /// Wraps `inner(context, unit, d)` so the outcome only sees treatments
    /// inside `N(i, radius)`; excluded units count as untreated.
    pub fn k_local(
        net: Network,
        radius: usize,
        inner: impl Fn(usize, usize, Assignment) -> f64 + Send + Sync + 'static,
    ) -> Self {
        StructuralFamily::new(format!("k_local({radius})"), net, move |r| {
            let keep = r.members.mask() & r.net.neighborhood(r.unit, radius).mask();
            Ok(inner(r.context, r.unit, r.assignment.masked(UnitSet::from_mask(keep))))
        })
    }

    pub fn with_declared_gamma(mut self, gamma: Vec<f64>) -> Result<Self> {
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Precondition("declared gamma must be finite and non-negative".into()));
        }
        if gamma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Precondition("declared gamma must be non-increasing in the radius".into()));
        }
        self.declared_gamma = Some(gamma);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn declared_gamma(&self) -> Option<&[f64]> {
        self.declared_gamma.as_deref()
    }

    /// Evaluates `g_{|S|}(i, d_S)` on `members`.
    pub fn evaluate(&self, members: UnitSet, unit: usize, d: Assignment, context: usize, scope: &str) -> Result<f64> {
        let r = Restriction {
            net: &self.net,
            members,
            unit,
            assignment: d.masked(members),
            context,
        };
        match (self.evaluator)(&r) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(Error::Evaluator {
                unit: unit + 1,
                scope: scope.to_string(),
                message: format!("non-finite value {v}"),
            }),
            Err(message) => Err(Error::Evaluator {
                unit: unit + 1,
                scope: scope.to_string(),
                message,
            }),
        }
    }
}

impl PotentialOutcomes for StructuralFamily {
    fn n(&self) -> usize {
        self.net.n()
    }

    fn mean_outcome(&self, context: usize, unit: usize, d: Assignment) -> Result<f64> {
        self.evaluate(self.net.units(), unit, d, context, "full network")
    }
}

fn restricted_distances(net: &Network, members: UnitSet, from: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.n()];
    dist[from] = Some(0);
    let mut reached = 1u32 << from;
    let mut frontier = reached;
    let mut k = 0;
    while frontier != 0 {
        k += 1;
        let mut next = 0u32;
        for j in UnitSet::from_mask(frontier).iter() {
            next |= net.row(j);
        }
        frontier = next & members.mask() & !reached;
        for j in UnitSet::from_mask(frontier).iter() {
            dist[j] = Some(k);
        }
        reached |= frontier;
    }
    dist
}

/// Truncation discrepancy at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AniDiscrepancy {
    pub radius: usize,
    /// Max over contexts and assignments, per unit.
    pub per_unit: Vec<f64>,
    pub gamma_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_declared: Option<bool>,
}

/// `gamma_hat(s) = max_{c, i, d} |g_n(i, d) - g_{|N(i,s)|}(i, d_{N(i,s)})|`.
pub fn ani_discrepancy(
    fam: &StructuralFamily,
    contexts: &ContextSet,
    s: usize,
    cap: EnumerationCap,
) -> Result<AniDiscrepancy> {
    let net = fam.network();
    let n = net.n();
    cap.check(n)?;
    let scope = format!("radius {s}");
    let mut per_unit = vec![0.0f64; n];
    for c in 0..contexts.len() {
        for (i, worst) in per_unit.iter_mut().enumerate() {
            let nbhd = net.neighborhood(i, s);
            for d in Assignment::all(n) {
                let full = fam.mean_outcome(c, i, d)?;
                let truncated = fam.evaluate(nbhd, i, d, c, &scope)?;
                *worst = worst.max((full - truncated).abs());
            }
        }
    }
    let gamma_hat = per_unit.iter().copied().fold(0.0, f64::max);
    let declared = fam.declared_gamma().map(|g| g.get(s).copied().unwrap_or_else(|| *g.last().unwrap_or(&0.0)));
    Ok(AniDiscrepancy {
        radius: s,
        per_unit,
        gamma_hat,
        declared,
        within_declared: declared.map(|g| gamma_hat <= g + super::EXACT_TOL),
    })
}

/// Discrepancies at every radius from 0 through the diameter, and whether
/// the declared schedule bounds all of them.
pub fn ani_profile(
    fam: &StructuralFamily,
    contexts: &ContextSet,
    cap: EnumerationCap,
) -> Result<(Vec<AniDiscrepancy>, Option<bool>)> {
    let diameter = fam.network().diameter();
    let rows = (0..=diameter)
        .map(|s| ani_discrepancy(fam, contexts, s, cap))
        .collect::<Result<Vec<_>>>()?;
    let bound = fam
        .declared_gamma()
        .map(|_| rows.iter().all(|r| r.within_declared.unwrap_or(true)));
    Ok((rows, bound))
}
