use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::conditional::conditional_law;
use super::{AssignmentLaw, Distribution};
use crate::error::{Error, Result};
use crate::exposures::{ExposureSpec, ExposureValue};
use crate::netcore::{Assignment, EnumerationCap, Network, UnitSet};

/// Two assignment vectors drawn together: the ego has the same treatment
/// in both, `low` has `tau_lo` treated neighbors and `high` adds
/// `tau_hi - tau_lo` more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoupledPair {
    pub low: Assignment,
    pub high: Assignment,
}

/// Parameters of the urn coupling around ego `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub ego: usize,
    pub d: bool,
    pub tau_hi: usize,
    pub tau_lo: usize,
}

impl CouplingSpec {
    fn validate(&self, net: &Network) -> Result<()> {
        if self.ego >= net.n() {
            return Err(Error::Precondition(format!("unit {} is not in the network", self.ego + 1)));
        }
        let gamma = net.degree(self.ego);
        if !(gamma >= self.tau_hi && self.tau_hi > self.tau_lo && self.tau_lo > 0) {
            return Err(Error::Precondition(format!(
                "need degree >= tau > tau' > 0, got {gamma} >= {} > {} > 0",
                self.tau_hi, self.tau_lo
            )));
        }
        Ok(())
    }

    /// Exposure values `(d, tau')` and `(d, tau)`.
    pub fn values(&self) -> (ExposureValue, ExposureValue) {
        let at = |count: usize| ExposureValue::Count {
            own: self.d,
            count: count as u32,
        };
        (at(self.tau_lo), at(self.tau_hi))
    }
}

fn check_p(p: &[f64]) -> Result<()> {
    match p.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        Some(bad) => Err(Error::Precondition(format!("coupling needs 0 < p < 1, got {bad}"))),
        None => Ok(()),
    }
}

/// Draws one coupled pair: outside units independently `Bernoulli(p)`,
/// then `tau'` neighbors without replacement for `low` and `tau - tau'`
/// further neighbors switched on for `high`.
pub fn sample_coupled_pair<R: Rng + ?Sized>(
    net: &Network,
    spec: CouplingSpec,
    p: f64,
    rng: &mut R,
) -> Result<CoupledPair> {
    spec.validate(net)?;
    check_p(&[p])?;
    let n = net.n();
    let nbrs = net.neighbors(spec.ego);
    let outside = nbrs.union(UnitSet::singleton(spec.ego)).complement(n);
    let mut base = Assignment::zeros(n).with(spec.ego, spec.d);
    for j in outside.iter() {
        base = base.with(j, rng.gen_bool(p));
    }
    let mut urn: Vec<usize> = nbrs.iter().collect();
    let (drawn, _) = urn.partial_shuffle(rng, spec.tau_hi);
    let mut low = base;
    for &j in &drawn[..spec.tau_lo] {
        low = low.with(j, true);
    }
    let mut high = low;
    for &j in &drawn[spec.tau_lo..] {
        high = high.with(j, true);
    }
    let pair = CoupledPair { low, high };
    assert!(pair.high.dominates(pair.low), "coupling broke the order: {pair:?}");
    assert_eq!(pair.low.count_in(nbrs), spec.tau_lo);
    assert_eq!(pair.high.count_in(nbrs), spec.tau_hi);
    Ok(pair)
}

/// Exact law of the coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCoupling {
    pub low: Distribution,
    pub high: Distribution,
    pub joint: Vec<(CoupledPair, f64)>,
}

/// Enumerates every outside Bernoulli pattern and every ordered urn
/// sequence; `p` holds the per-unit probabilities used for outside units.
pub fn exact_coupling_law_with(
    net: &Network,
    spec: CouplingSpec,
    p: &[f64],
    cap: EnumerationCap,
) -> Result<ExactCoupling> {
    spec.validate(net)?;
    let n = net.n();
    cap.check(n)?;
    if p.len() != n {
        return Err(Error::SizeMismatch { left: n, right: p.len() });
    }
    check_p(p)?;
    let nbrs: Vec<usize> = net.neighbors(spec.ego).iter().collect();
    let outside = net.neighbors(spec.ego).union(UnitSet::singleton(spec.ego)).complement(n);
    let outside_law = AssignmentLaw::ProductBernoulli {
        p: (0..n).map(|j| if outside.contains(j) { p[j] } else { 0.0 }).collect(),
    }
    .atoms();
    let sequences = ordered_draws(nbrs.len(), spec.tau_hi);
    let per_sequence = 1.0 / sequences.len() as f64;
    let ego = if spec.d { 1u32 << spec.ego } else { 0 };
    let mut joint: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for &(o, po) in &outside_law {
        for seq in &sequences {
            let low = seq[..spec.tau_lo].iter().fold(o.bits() | ego, |acc, &k| acc | 1 << nbrs[k]);
            let high = seq[spec.tau_lo..].iter().fold(low, |acc, &k| acc | 1 << nbrs[k]);
            *joint.entry((low, high)).or_default() += po * per_sequence;
        }
    }
    let mut low: BTreeMap<u32, f64> = BTreeMap::new();
    let mut high: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(l, h), &q) in &joint {
        *low.entry(l).or_default() += q;
        *high.entry(h).or_default() += q;
    }
    let dist = |m: BTreeMap<u32, f64>| {
        Distribution::from_sorted(n, m.into_iter().map(|(b, q)| (Assignment::new(b, n), q)).collect())
    };
    Ok(ExactCoupling {
        low: dist(low),
        high: dist(high),
        joint: joint
            .into_iter()
            .map(|((l, h), q)| {
                (
                    CoupledPair {
                        low: Assignment::new(l, n),
                        high: Assignment::new(h, n),
                    },
                    q,
                )
            })
            .collect(),
    })
}

pub fn exact_coupling_law(net: &Network, spec: CouplingSpec, p: f64, cap: EnumerationCap) -> Result<ExactCoupling> {
    exact_coupling_law_with(net, spec, &vec![p; net.n()], cap)
}

/// All ordered selections of `k` distinct indices out of `0..m`.
fn ordered_draws(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, k: usize, prefix: &mut Vec<usize>, used: u32, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for j in 0..m {
            if used >> j & 1 == 0 {
                prefix.push(j);
                go(m, k, prefix, used | 1 << j, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(m, k, &mut Vec::with_capacity(k), 0, &mut out);
    out
}

/// Total-variation distances between the coupling's marginals and the
/// conditional laws of a product mechanism with probabilities `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingGap {
    pub tv_low: f64,
    pub tv_high: f64,
}

pub fn coupling_gap(net: &Network, spec: CouplingSpec, p: &[f64], cap: EnumerationCap) -> Result<CouplingGap> {
    let exact = exact_coupling_law_with(net, spec, p, cap)?;
    let law = AssignmentLaw::ProductBernoulli { p: p.to_vec() };
    let ue = ExposureSpec::NeighborCount.for_unit(net, spec.ego);
    let (t_lo, t_hi) = spec.values();
    let lo = conditional_law(&law, &ue, &t_lo, "c")?;
    let hi = conditional_law(&law, &ue, &t_hi, "c")?;
    Ok(CouplingGap {
        tv_low: exact.low.total_variation(&lo),
        tv_high: exact.high.total_variation(&hi),
    })
}
