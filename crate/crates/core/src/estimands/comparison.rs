use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{tau, Problem, TauResult};
use crate::error::{Error, Result};
use crate::netcore::{Assignment, UnitSet};
use crate::outcomes::EXACT_TOL;

/// Which unit-level contrasts a sign-preservation criterion quantifies
/// over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    /// Every pair with `f(i,d) = t` and `f(i,d') = t'`.
    General,
    /// Additionally `d` and `d'` agree outside the neighborhood.
    Partial,
    /// Additionally `d_N >= d'_N` componentwise.
    Ordered,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 3] = [ComparisonKind::General, ComparisonKind::Partial, ComparisonKind::Ordered];

    pub fn name(self) -> &'static str {
        match self {
            ComparisonKind::General => "general",
            ComparisonKind::Partial => "partial",
            ComparisonKind::Ordered => "ordered",
        }
    }

    fn admits(self, nbhd: UnitSet, d: Assignment, d_prime: Assignment) -> bool {
        let outside = !nbhd.mask();
        match self {
            ComparisonKind::General => true,
            ComparisonKind::Partial => d.bits() & outside == d_prime.bits() & outside,
            ComparisonKind::Ordered => {
                d.bits() & outside == d_prime.bits() & outside && d.masked(nbhd).dominates(d_prime.masked(nbhd))
            }
        }
    }
}

impl fmt::Display for ComparisonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComparisonKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(ComparisonKind::General),
            "partial" => Ok(ComparisonKind::Partial),
            "ordered" => Ok(ComparisonKind::Ordered),
            other => Err(Error::Parse(format!("unknown comparison kind {other:?}"))),
        }
    }
}

/// `Y_i(d) - Y_i(d')` in one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub context: String,
    pub unit: usize,
    pub d: Assignment,
    pub d_prime: Assignment,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSet {
    pub unit: usize,
    pub kind: ComparisonKind,
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonSet {
    /// Rejects entries that break the kind's constraints.
    pub fn new(p: &Problem<'_>, unit: usize, kind: ComparisonKind, entries: Vec<ComparisonEntry>) -> Result<Self> {
        let ue = p.unit_exposure(unit);
        let nbhd = ue.neighborhood();
        for e in &entries {
            let ok = e.unit == unit + 1
                && ue.value(e.d) == p.spec.t
                && ue.value(e.d_prime) == p.spec.t_prime
                && kind.admits(nbhd, e.d, e.d_prime);
            if !ok {
                return Err(Error::Precondition(format!(
                    "pair ({}, {}) does not belong to the {kind} set of unit {}",
                    e.d,
                    e.d_prime,
                    unit + 1
                )));
            }
        }
        Ok(ComparisonSet { unit: unit + 1, kind, entries })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.value)
    }
}

/// Enumerates the comparison set of unit `i` in every positive-weight
/// context. Outside subvectors are iterated once; neighborhood patterns
/// attaining `t` and `t'` are paired within.
pub fn comparison_set(kind: ComparisonKind, p: &Problem<'_>, i: usize) -> Result<ComparisonSet> {
    p.check_cap()?;
    let n = p.n();
    let ue = p.unit_exposure(i);
    let nbhd = ue.neighborhood();
    let outside = nbhd.complement(n);
    let hit_t = ue.patterns_attaining(&p.spec.t);
    let hit_tp = ue.patterns_attaining(&p.spec.t_prime);
    let mut entries = Vec::new();
    for c in p.contexts.active() {
        let id = &p.contexts.get(c).id;
        let y = |d| p.outcomes.mean_outcome(c, i, d);
        let mut push = |d: Assignment, dp: Assignment| -> Result<()> {
            entries.push(ComparisonEntry {
                context: id.clone(),
                unit: i + 1,
                d,
                d_prime: dp,
                value: y(d)? - y(dp)?,
            });
            Ok(())
        };
        match kind {
            ComparisonKind::General => {
                for &x in &hit_t {
                    for o in outside.submasks() {
                        for &xp in &hit_tp {
                            for op in outside.submasks() {
                                push(Assignment::new(x | o, n), Assignment::new(xp | op, n))?;
                            }
                        }
                    }
                }
            }
            ComparisonKind::Partial | ComparisonKind::Ordered => {
                for o in outside.submasks() {
                    for &x in &hit_t {
                        for &xp in &hit_tp {
                            if kind == ComparisonKind::Ordered && x & xp != xp {
                                continue;
                            }
                            push(Assignment::new(x | o, n), Assignment::new(xp | o, n))?;
                        }
                    }
                }
            }
        }
    }
    ComparisonSet::new(p, i, kind, entries)
}

/// What the pooled comparison entries say about the sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "premise", rename_all = "snake_case")]
pub enum Premise {
    /// Every entry is zero within tolerance, so both one-signed premises
    /// hold at once.
    AllZero,
    AllNonNegative,
    AllNonPositive,
    Mixed {
        negative: ComparisonEntry,
        positive: ComparisonEntry,
    },
    EmptySets,
}

impl Premise {
    pub fn label(&self) -> &'static str {
        match self {
            Premise::AllZero => "ALL_ZERO",
            Premise::AllNonNegative => "ALL_NON_NEGATIVE",
            Premise::AllNonPositive => "ALL_NON_POSITIVE",
            Premise::Mixed { .. } => "MIXED",
            Premise::EmptySets => "EMPTY_SETS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignOutcome {
    Preserved,
    Violation,
    Vacuous,
}

impl SignOutcome {
    pub fn label(self) -> &'static str {
        match self {
            SignOutcome::Preserved => "PRESERVED",
            SignOutcome::Violation => "VIOLATION",
            SignOutcome::Vacuous => "VACUOUS",
        }
    }
}

impl fmt::Display for SignOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignVerdict {
    pub kind: ComparisonKind,
    #[serde(flatten)]
    pub premise: Premise,
    pub tau: f64,
    pub verdict: SignOutcome,
    pub entries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_entry: Option<ComparisonEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_entry: Option<ComparisonEntry>,
    /// Unit-level trace of `tau`, kept for violations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TauResult>,
}

impl SignVerdict {
    pub fn is_violation(&self) -> bool {
        self.verdict == SignOutcome::Violation
    }
}

/// Pools the comparison sets of every subpopulation unit across
/// contexts, classifies their sign and confronts it with `tau`.
pub fn check_sign_preservation(kind: ComparisonKind, p: &Problem<'_>) -> Result<SignVerdict> {
    let t = tau(p)?;
    sign_verdict(kind, p, t)
}

pub(crate) fn sign_verdict(kind: ComparisonKind, p: &Problem<'_>, t: TauResult) -> Result<SignVerdict> {
    let mut min_entry: Option<ComparisonEntry> = None;
    let mut max_entry: Option<ComparisonEntry> = None;
    let mut count = 0;
    for i in p.spec.subpop.iter() {
        for e in comparison_set(kind, p, i)?.entries {
            count += 1;
            if min_entry.as_ref().map_or(true, |m| e.value < m.value) {
                min_entry = Some(e.clone());
            }
            if max_entry.as_ref().map_or(true, |m| e.value > m.value) {
                max_entry = Some(e);
            }
        }
    }
    let premise = match (&min_entry, &max_entry) {
        (Some(lo), Some(hi)) => {
            let nonneg = lo.value >= -EXACT_TOL;
            let nonpos = hi.value <= EXACT_TOL;
            match (nonneg, nonpos) {
                (true, true) => Premise::AllZero,
                (true, false) => Premise::AllNonNegative,
                (false, true) => Premise::AllNonPositive,
                (false, false) => Premise::Mixed {
                    negative: lo.clone(),
                    positive: hi.clone(),
                },
            }
        }
        _ => Premise::EmptySets,
    };
    let tau = t.tau;
    let contradicts = match premise {
        Premise::AllZero => tau.abs() > EXACT_TOL,
        Premise::AllNonNegative => tau < -EXACT_TOL,
        Premise::AllNonPositive => tau > EXACT_TOL,
        Premise::Mixed { .. } | Premise::EmptySets => false,
    };
    let verdict = match premise {
        Premise::Mixed { .. } | Premise::EmptySets => SignOutcome::Vacuous,
        _ if contradicts => SignOutcome::Violation,
        _ => SignOutcome::Preserved,
    };
    Ok(SignVerdict {
        kind,
        premise,
        tau,
        verdict,
        entries: count,
        min_entry,
        max_entry,
        trace: (verdict == SignOutcome::Violation).then_some(t),
    })
}
