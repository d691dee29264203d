use std::collections::BTreeMap;

use serde::Serialize;

use super::{AssignmentLaw, Distribution, Mechanism};
use crate::error::{Error, Result};
use crate::exposures::{ExposureValue, UnitExposure};
use crate::netcore::{Assignment, EnumerationCap};
use crate::outcomes::{ContextSet, EXACT_TOL};
use crate::verdict::Verdict;

/// Law of `D` given `T_i = t` in one context, by restriction and
/// renormalization. `context` only labels the overlap diagnostic.
///
/// The neighborhood and outside parts of a product law are independent,
/// so for those the outside factor is expanded directly instead of
/// filtering the whole support.
pub fn conditional_law(
    law: &AssignmentLaw,
    ue: &UnitExposure,
    t: &ExposureValue,
    context: &str,
) -> Result<Distribution> {
    let n = law.n();
    let overlap = || Error::OverlapViolation {
        unit: ue.unit() + 1,
        value: t.to_string(),
        context: context.to_string(),
    };
    let mut rows: Vec<(Assignment, f64)> = match law {
        AssignmentLaw::ProductBernoulli { p } | AssignmentLaw::GameInduced { marginals: p } => {
            let nbhd = ue.neighborhood();
            let inside: Vec<(u32, f64)> = ue
                .patterns_attaining(t)
                .into_iter()
                .map(|x| (x, nbhd.iter().map(|j| bern(p[j], x >> j & 1 == 1)).product()))
                .filter(|&(_, q)| q > 0.0)
                .collect();
            if inside.is_empty() {
                return Err(overlap());
            }
            let outside = nbhd.complement(n);
            let outside_law = AssignmentLaw::ProductBernoulli {
                p: (0..n).map(|j| if outside.contains(j) { p[j] } else { 0.0 }).collect(),
            }
            .atoms();
            let mut rows = Vec::with_capacity(inside.len() * outside_law.len());
            for &(x, q) in &inside {
                for &(o, r) in &outside_law {
                    rows.push((Assignment::new(x | o.bits(), n), q * r));
                }
            }
            rows
        }
        _ => law.atoms().into_iter().filter(|&(d, _)| ue.value(d) == *t).collect(),
    };
    let mass: f64 = rows.iter().map(|(_, p)| p).sum();
    if rows.is_empty() || mass <= 0.0 {
        return Err(overlap());
    }
    rows.sort_by_key(|(d, _)| d.bits());
    for row in &mut rows {
        row.1 /= mass;
    }
    Ok(Distribution::from_sorted(n, rows))
}

fn bern(p: f64, on: bool) -> f64 {
    if on {
        p
    } else {
        1.0 - p
    }
}

/// `P(T_i = t | c)`.
pub fn event_mass(law: &AssignmentLaw, ue: &UnitExposure, t: &ExposureValue) -> f64 {
    law.atoms().into_iter().filter(|&(d, _)| ue.value(d) == *t).map(|(_, p)| p).sum()
}

/// The factorization that fails worst.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiWitness {
    pub s: String,
    pub d: Assignment,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks `P(D=d | T_i=s) = P(D_N=d_N | T_i=s) * P(D_{-N}=d_{-N})` for
/// `s` in `{t, t'}` and every `d`, with `N` the exposure's neighborhood.
///
/// Among equally bad violations the witness prefers an assignment the
/// conditional law rules out entirely.
pub fn check_ci_selection(
    law: &AssignmentLaw,
    ue: &UnitExposure,
    t: &ExposureValue,
    t_prime: &ExposureValue,
    context: &str,
    cap: EnumerationCap,
) -> Result<Verdict<CiWitness>> {
    let n = law.n();
    cap.check(n)?;
    let nbhd = ue.neighborhood();
    let outside = nbhd.complement(n);
    let unconditional = law.to_distribution().marginal(outside);
    let mut worst: Option<(f64, bool, CiWitness)> = None;
    for s in [t, t_prime] {
        let cond = conditional_law(law, ue, s, context)?;
        let inside = cond.marginal(nbhd);
        for (&x, &q) in &inside {
            for (&o, &r) in &unconditional {
                let d = Assignment::new(x | o, n);
                let lhs = cond.prob(d);
                let rhs = q * r;
                let gap = (lhs - rhs).abs();
                if gap <= EXACT_TOL {
                    continue;
                }
                let excluded = lhs == 0.0;
                let better = match &worst {
                    None => true,
                    Some((g, e, _)) => gap > g + EXACT_TOL || ((gap - g).abs() <= EXACT_TOL && excluded && !e),
                };
                if better {
                    worst = Some((
                        gap,
                        excluded,
                        CiWitness {
                            s: s.to_string(),
                            d,
                            lhs,
                            rhs,
                        },
                    ));
                }
            }
        }
    }
    Ok(match worst {
        Some((_, _, w)) => Verdict::Fails(w),
        None => Verdict::Holds,
    })
}

/// Evidence that the joint law is not the product of its marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependenceWitness {
    /// `P(D_j = 1, D_k = 1)` differs from `P(D_j = 1) P(D_k = 1)`.
    Pair { units: [usize; 2], joint: f64, product: f64 },
    /// Pairwise independent, but the point mass of `d` differs.
    Joint { d: Assignment, joint: f64, product: f64 },
}

/// HOLDS iff the law equals the product of its one-dimensional marginals.
pub fn check_unit_independence(law: &AssignmentLaw, cap: EnumerationCap) -> Result<Verdict<DependenceWitness>> {
    let n = law.n();
    cap.check(n)?;
    let dist = law.to_distribution();
    let marg = law.marginals();
    for j in 0..n {
        for k in j + 1..n {
            let both = (1u32 << j) | (1u32 << k);
            let joint: f64 = dist.atoms().iter().filter(|(d, _)| d.bits() & both == both).map(|(_, p)| p).sum();
            let product = marg[j] * marg[k];
            if (joint - product).abs() > EXACT_TOL {
                return Ok(Verdict::Fails(DependenceWitness::Pair {
                    units: [j + 1, k + 1],
                    joint,
                    product,
                }));
            }
        }
    }
    for d in Assignment::all(n) {
        let joint = dist.prob(d);
        let product = super::law::product_prob(&marg, d);
        if (joint - product).abs() > EXACT_TOL {
            return Ok(Verdict::Fails(DependenceWitness::Joint { d, joint, product }));
        }
    }
    Ok(Verdict::Holds)
}

/// Two contexts with the same controls `(X, A)` but different mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfoundingWitness {
    pub contexts: [String; 2],
    pub d: Assignment,
    pub p: [f64; 2],
}

/// Contexts that differ only in the outcome-noise state must carry the
/// same assignment law. Contexts without covariates are their own class.
pub fn check_unconfoundedness(mech: &Mechanism, contexts: &ContextSet) -> Result<Verdict<ConfoundingWitness>> {
    if mech.contexts() != contexts.len() {
        return Err(Error::SizeMismatch {
            left: contexts.len(),
            right: mech.contexts(),
        });
    }
    let mut classes: BTreeMap<&[i64], usize> = BTreeMap::new();
    for (c, ctx) in contexts.iter().enumerate() {
        let Some(x) = ctx.covariates.as_deref() else {
            continue;
        };
        let Some(&first) = classes.get(x) else {
            classes.insert(x, c);
            continue;
        };
        let a = mech.law(first).to_distribution();
        let b = mech.law(c).to_distribution();
        let mut support: Vec<u32> = a.atoms().iter().chain(b.atoms()).map(|(d, _)| d.bits()).collect();
        support.sort_unstable();
        support.dedup();
        for bits in support {
            let d = Assignment::new(bits, mech.n());
            let (pa, pb) = (a.prob(d), b.prob(d));
            if (pa - pb).abs() > EXACT_TOL {
                return Ok(Verdict::Fails(ConfoundingWitness {
                    contexts: [contexts.get(first).id.clone(), ctx.id.clone()],
                    d,
                    p: [pa, pb],
                }));
            }
        }
    }
    Ok(Verdict::Holds)
}
