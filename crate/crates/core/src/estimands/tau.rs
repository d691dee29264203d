use rayon::prelude::*;
use serde::Serialize;

use super::Problem;
use crate::error::{Error, Result};
use crate::exposures::{check_pindown, Pindown};
use crate::netcore::{Assignment, SubWord};

/// Conditional means of one unit in one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextTerm {
    pub context: String,
    pub weight: f64,
    pub mean_t: f64,
    pub mean_t_prime: f64,
    pub contrast: f64,
}

/// `E[Y_i | T_i = t] - E[Y_i | T_i = t']`, averaged over contexts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitTerm {
    pub unit: usize,
    pub contrast: f64,
    pub per_context: Vec<ContextTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauResult {
    pub tau: f64,
    pub per_unit: Vec<UnitTerm>,
}

/// Exact `tau(t, t')`: per unit and positive-weight context, the
/// conditional means under `P(D | T_i = s, c)`; contexts are averaged by
/// weight and units uniformly.
pub fn tau(p: &Problem<'_>) -> Result<TauResult> {
    p.check_cap()?;
    let spec = p.spec;
    let units: Vec<usize> = spec.subpop.iter().collect();
    if units.is_empty() {
        return Err(Error::EmptySubpopulation);
    }
    let per_unit = units
        .par_iter()
        .map(|&i| {
            let ue = p.unit_exposure(i);
            let mut per_context = Vec::new();
            let mut contrast = 0.0;
            for c in p.contexts.active() {
                let mean = |s| -> Result<f64> {
                    let law = p.conditional(&ue, c, s)?;
                    law.atoms()
                        .iter()
                        .map(|&(d, q)| Ok(q * p.outcomes.mean_outcome(c, i, d)?))
                        .sum()
                };
                let mean_t = mean(&spec.t)?;
                let mean_t_prime = mean(&spec.t_prime)?;
                let weight = p.contexts.get(c).weight;
                contrast += weight * (mean_t - mean_t_prime);
                per_context.push(ContextTerm {
                    context: p.contexts.get(c).id.clone(),
                    weight,
                    mean_t,
                    mean_t_prime,
                    contrast: mean_t - mean_t_prime,
                });
            }
            Ok(UnitTerm {
                unit: i + 1,
                contrast,
                per_context,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tau = per_unit.iter().map(|u| u.contrast).sum::<f64>() / per_unit.len() as f64;
    Ok(TauResult { tau, per_unit })
}

/// One unit's share of `tau*` and `R_n`, with its pinned-down
/// neighborhood subvector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTerm {
    pub unit: usize,
    pub delta: SubWord,
    pub tau_star: f64,
    pub bias_rn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub tau_star: f64,
    pub bias_rn: f64,
    pub per_unit: Vec<DecompositionTerm>,
}

/// The `delta_i` that `T_i = t'` pins down, in subpopulation order.
pub fn pinned_neighborhoods(p: &Problem<'_>) -> Result<Vec<(usize, SubWord)>> {
    let spec = p.spec;
    spec.subpop
        .iter()
        .map(|i| match check_pindown(&spec.exposure, p.net, i, &spec.t_prime, p.cap)? {
            Pindown::Holds { delta } => Ok((i, delta)),
            Pindown::Fails { first, second } => Err(Error::PindownViolation {
                unit: i + 1,
                value: spec.t_prime.to_string(),
                detail: format!("neighborhood patterns {first} and {second} both attain it"),
            }),
            Pindown::FailsEmpty => Err(Error::PindownViolation {
                unit: i + 1,
                value: spec.t_prime.to_string(),
                detail: "no neighborhood pattern attains it".into(),
            }),
        })
        .collect()
}

/// `tau*` and `R_n`, each evaluated from its own defining sum:
///
/// `tau*_i = sum_d [Y_i(d) - Y_i(delta_i, d_{-N})] P(d | t)` and
/// `R_i = sum_d Y_i(delta_i, d_{-N}) [P(d | t) - P(d | t')]`.
pub fn decompose(p: &Problem<'_>) -> Result<Decomposition> {
    p.check_cap()?;
    if p.spec.subpop.is_empty() {
        return Err(Error::EmptySubpopulation);
    }
    let pinned = pinned_neighborhoods(p)?;
    let n = p.n();
    let per_unit = pinned
        .par_iter()
        .map(|&(i, delta)| {
            let ue = p.unit_exposure(i);
            let nbhd = ue.neighborhood();
            let fill = delta.embed(nbhd);
            let swap = |d: Assignment| Assignment::new((d.bits() & !nbhd.mask()) | fill, n);
            let (mut tau_star, mut bias_rn) = (0.0, 0.0);
            for c in p.contexts.active() {
                let w = p.contexts.get(c).weight;
                let y = |d| p.outcomes.mean_outcome(c, i, d);
                let at_t = p.conditional(&ue, c, &p.spec.t)?;
                let at_t_prime = p.conditional(&ue, c, &p.spec.t_prime)?;
                let mut star = 0.0;
                let mut rn = 0.0;
                for &(d, q) in at_t.atoms() {
                    let pinned = y(swap(d))?;
                    star += (y(d)? - pinned) * q;
                    rn += pinned * q;
                }
                for &(d, q) in at_t_prime.atoms() {
                    rn -= y(swap(d))? * q;
                }
                tau_star += w * star;
                bias_rn += w * rn;
            }
            Ok(DecompositionTerm {
                unit: i + 1,
                delta,
                tau_star,
                bias_rn,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = per_unit.len() as f64;
    Ok(Decomposition {
        tau_star: per_unit.iter().map(|u| u.tau_star).sum::<f64>() / m,
        bias_rn: per_unit.iter().map(|u| u.bias_rn).sum::<f64>() / m,
        per_unit,
    })
}

pub fn tau_star(p: &Problem<'_>) -> Result<f64> {
    Ok(decompose(p)?.tau_star)
}

pub fn bias_rn(p: &Problem<'_>) -> Result<f64> {
    Ok(decompose(p)?.bias_rn)
}
