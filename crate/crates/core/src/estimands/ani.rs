use serde::Serialize;

use super::{decompose, tau, EstimandSpec, Problem};
use crate::error::Result;
use crate::mechanisms::Mechanism;
use crate::netcore::EnumerationCap;
use crate::outcomes::{ani_discrepancy, ContextSet, StructuralFamily, EXACT_TOL};

/// `|tau - tau*|` against the truncation discrepancy at the exposure's
/// radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AniBiasReport {
    pub radius: usize,
    pub tau: f64,
    pub tau_star: f64,
    pub gap: f64,
    pub gamma_hat: f64,
    /// `gap <= gamma_hat`.
    pub within_gamma: bool,
    /// `gamma_hat` times the mean distance `||P(.|t) - P(.|t')||_1`; the
    /// gap never exceeds this, and it is at most `2 * gamma_hat`.
    pub l1_bound: f64,
    pub within_l1_bound: bool,
}

pub fn ani_bias_check(
    fam: &StructuralFamily,
    contexts: &ContextSet,
    mechanism: &Mechanism,
    spec: &EstimandSpec,
    cap: EnumerationCap,
) -> Result<AniBiasReport> {
    let net = fam.network();
    let p = Problem::new(net, contexts, fam, mechanism, spec)?.with_cap(cap);
    let radius = spec.exposure.radius(net);
    let t = tau(&p)?;
    let dec = decompose(&p)?;
    let gamma_hat = ani_discrepancy(fam, contexts, radius, cap)?.gamma_hat;
    let mut l1 = 0.0;
    for i in spec.subpop.iter() {
        let ue = p.unit_exposure(i);
        for c in contexts.active() {
            let a = p.conditional(&ue, c, &spec.t)?;
            let b = p.conditional(&ue, c, &spec.t_prime)?;
            l1 += contexts.get(c).weight * 2.0 * a.total_variation(&b);
        }
    }
    l1 /= spec.subpop.len() as f64;
    let gap = (t.tau - dec.tau_star).abs();
    let l1_bound = gamma_hat * l1;
    Ok(AniBiasReport {
        radius,
        tau: t.tau,
        tau_star: dec.tau_star,
        gap,
        gamma_hat,
        within_gamma: gap <= gamma_hat + EXACT_TOL,
        l1_bound,
        within_l1_bound: gap <= l1_bound + EXACT_TOL,
    })
}
