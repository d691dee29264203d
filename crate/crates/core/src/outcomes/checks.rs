use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use super::{ContextSet, PotentialOutcomes, EXACT_TOL};
use crate::error::Result;
use crate::exposures::ExposureSpec;
use crate::netcore::{Assignment, EnumerationCap, Network};
use crate::verdict::Verdict;

/// Two assignments that the check says must give the same outcome but do
/// not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeWitness {
    pub context: String,
    pub unit: usize,
    pub d: Assignment,
    pub d_prime: Assignment,
    pub y: f64,
    pub y_prime: f64,
}

/// HOLDS when `Y_i(d) = Y_i(d')` whenever `f(d_{N(i,K)}) = f(d'_{N(i,K)})`.
pub fn check_correct_specification(
    m: &dyn PotentialOutcomes,
    contexts: &ContextSet,
    f: &ExposureSpec,
    net: &Network,
    cap: EnumerationCap,
) -> Result<Verdict<OutcomeWitness>> {
    cap.check(net.n())?;
    for_each_unit(m, contexts, net, |i| {
        let ue = f.for_unit(net, i);
        move |d: Assignment| ue.value(d)
    })
}

/// HOLDS when `Y_i(d) = Y_i(d')` whenever `d` and `d'` agree on
/// `N(i, k_prime)`.
pub fn check_k_locality(
    m: &dyn PotentialOutcomes,
    contexts: &ContextSet,
    net: &Network,
    k_prime: usize,
    cap: EnumerationCap,
) -> Result<Verdict<OutcomeWitness>> {
    cap.check(net.n())?;
    for_each_unit(m, contexts, net, |i| {
        let nbhd = net.neighborhood(i, k_prime);
        move |d: Assignment| d.masked(nbhd).bits()
    })
}

/// Groups `{0,1}^n` by `key` per (context, unit) and reports the first
/// group whose outcomes disagree.
fn for_each_unit<K, G, F>(
    m: &dyn PotentialOutcomes,
    contexts: &ContextSet,
    net: &Network,
    key_for: G,
) -> Result<Verdict<OutcomeWitness>>
where
    K: Hash + Eq,
    G: Fn(usize) -> F,
    F: Fn(Assignment) -> K,
{
    let n = net.n();
    for c in 0..contexts.len() {
        for i in 0..n {
            let key = key_for(i);
            let mut seen: HashMap<K, (Assignment, f64)> = HashMap::new();
            for d in Assignment::all(n) {
                let y = m.mean_outcome(c, i, d)?;
                match seen.get(&key(d)) {
                    Some(&(d0, y0)) if (y - y0).abs() > EXACT_TOL => {
                        return Ok(Verdict::Fails(OutcomeWitness {
                            context: contexts.get(c).id.clone(),
                            unit: i + 1,
                            d: d0,
                            d_prime: d,
                            y: y0,
                            y_prime: y,
                        }));
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key(d), (d, y));
                    }
                }
            }
        }
    }
    Ok(Verdict::Holds)
}
