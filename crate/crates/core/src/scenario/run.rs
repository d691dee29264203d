use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use super::load::{Check, Scenario};
use crate::error::{Error, Result};
use crate::estimands::{ani_bias_check, decompose, sign_verdict, tau, Decomposition, Problem, SignVerdict, TauResult};
use crate::exposures::check_pindown;
use crate::mechanisms::{check_ci_selection, check_unconfoundedness, check_unit_independence};
use crate::netcore::EnumerationCap;
use crate::outcomes::{check_correct_specification, check_k_locality, EXACT_TOL};
use crate::verdict::Verdict;

pub const TOOL_VERSION: &str = concat!("exposure-lab ", env!("CARGO_PKG_VERSION"));

/// Knobs a caller may override on top of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunFlags {
    pub seed: Option<u64>,
    pub max_n: Option<usize>,
}

/// One assumption check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionRecord {
    pub check: &'static str,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRow {
    pub unit: usize,
    pub contrast: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_rn: Option<f64>,
}

/// Everything computed for a scenario. Serializes deterministically; the
/// wall-clock time is kept out of the machine-readable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub scenario: String,
    pub digest: String,
    pub seed: u64,
    pub n: usize,
    pub exposure: String,
    pub t: String,
    pub t_prime: String,
    pub subpopulation: Vec<usize>,
    pub tau: f64,
    pub tau_star: Option<f64>,
    #[serde(rename = "R_n")]
    pub r_n: Option<f64>,
    pub per_unit: Vec<UnitRow>,
    pub assumptions: Vec<AssumptionRecord>,
    pub criteria: Vec<SignVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ani: Option<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub games: Vec<Value>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

impl Report {
    pub fn assumption(&self, name: &str) -> Option<&AssumptionRecord> {
        self.assumptions.iter().find(|a| a.check == name)
    }

    pub fn criterion(&self, kind: crate::estimands::ComparisonKind) -> Option<&SignVerdict> {
        self.criteria.iter().find(|c| c.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width summary for terminals.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(s, "scenario   {} ({})", self.scenario, &self.digest[..12]);
        let _ = writeln!(s, "estimand   tau({}, {}) under {} on M = {:?}", self.t, self.t_prime, self.exposure, self.subpopulation);
        let _ = writeln!(s, "tau        {:.6}", self.tau);
        let _ = writeln!(s, "tau*       {}", opt(self.tau_star));
        let _ = writeln!(s, "R_n        {}", opt(self.r_n));
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<6} {:>12} {:>8} {:>12} {:>12}", "unit", "contrast", "delta", "tau*", "R_n");
        for u in &self.per_unit {
            let _ = writeln!(
                s,
                "{:<6} {:>12.6} {:>8} {:>12} {:>12}",
                u.unit,
                u.contrast,
                u.delta.as_deref().unwrap_or("-"),
                opt(u.tau_star),
                opt(u.bias_rn)
            );
        }
        let _ = writeln!(s);
        for a in &self.assumptions {
            let _ = writeln!(s, "{:<24} {}", a.check, a.verdict);
        }
        for c in &self.criteria {
            let _ = writeln!(s, "{:<24} {} (premise {}, {} entries)", format!("sign_{}", c.kind), c.verdict, c.premise.label(), c.entries);
        }
        for note in &self.notes {
            let _ = writeln!(s, "note: {note}");
        }
        let _ = writeln!(s, "runtime    {:.1} ms", self.runtime_ms);
        s
    }
}

fn witness<W: Serialize>(v: &W) -> Value {
    serde_json::to_value(v).expect("witness serializes")
}

fn record<W: Serialize>(check: Check, v: &Verdict<W>, extra: impl FnOnce(Value) -> Value) -> AssumptionRecord {
    AssumptionRecord {
        check: check.name(),
        verdict: v.label(),
        witness: v.witness().map(|w| extra(witness(w))),
    }
}

/// Executes the scenario's checks in dependency order: mechanism
/// assumptions, pin-down, overlap and CI selection, then the estimand,
/// its decomposition and the outcome-side checks.
pub fn run(sc: &Scenario, flags: RunFlags) -> Result<Report> {
    let start = std::time::Instant::now();
    let cap = match flags.max_n {
        Some(k) => EnumerationCap::new(k),
        None => EnumerationCap::MAX,
    };
    cap.check(sc.net.n())?;
    let wants = |c: Check| sc.checks.contains(&c);
    let p = Problem::new(&sc.net, &sc.contexts, sc.outcomes.as_dyn(), &sc.mechanism, &sc.spec)?.with_cap(cap);
    let mut assumptions = Vec::new();
    let mut notes = vec!["outcome extrema are taken context by context".to_string()];
    if let Some(w) = &sc.subpopulation_warning {
        notes.push(w.clone());
    }

    if wants(Check::Unconfoundedness) {
        let v = check_unconfoundedness(&sc.mechanism, &sc.contexts)?;
        assumptions.push(record(Check::Unconfoundedness, &v, |w| w));
    }
    if wants(Check::UnitIndependence) {
        let mut verdict = None;
        for c in sc.contexts.active() {
            let v = check_unit_independence(sc.mechanism.law(c), cap)?;
            if !v.holds() {
                let id = sc.contexts.get(c).id.clone();
                verdict = Some(record(Check::UnitIndependence, &v, |w| json!({"context": id, "detail": w})));
                break;
            }
        }
        assumptions.push(verdict.unwrap_or(AssumptionRecord {
            check: Check::UnitIndependence.name(),
            verdict: "HOLDS",
            witness: None,
        }));
    }

    // pin-down decides whether the decomposition exists
    let mut pinned = true;
    if wants(Check::Pindown) || wants(Check::CorrectSpecification) {
        let mut failure = None;
        for i in sc.spec.subpop.iter() {
            let v = check_pindown(&sc.spec.exposure, &sc.net, i, &sc.spec.t_prime, cap)?;
            if !v.holds() && failure.is_none() {
                failure = Some(json!({"unit": i + 1, "detail": witness(&v)}));
            }
        }
        pinned = failure.is_none();
        if wants(Check::Pindown) {
            assumptions.push(AssumptionRecord {
                check: Check::Pindown.name(),
                verdict: if pinned { "HOLDS" } else { "FAILS" },
                witness: failure,
            });
        }
    }

    // overlap is checked by conditioning; errors carry the unit and context
    if wants(Check::CiSelection) {
        let mut failure = None;
        'outer: for c in sc.contexts.active() {
            let id = &sc.contexts.get(c).id;
            for i in sc.spec.subpop.iter() {
                let ue = p.unit_exposure(i);
                let v = check_ci_selection(sc.mechanism.law(c), &ue, &sc.spec.t, &sc.spec.t_prime, id, cap)?;
                if let Verdict::Fails(w) = v {
                    failure = Some(json!({"context": id, "unit": i + 1, "detail": witness(&w)}));
                    break 'outer;
                }
            }
        }
        assumptions.push(AssumptionRecord {
            check: Check::CiSelection.name(),
            verdict: if failure.is_none() { "HOLDS" } else { "FAILS" },
            witness: failure,
        });
    }

    let t: TauResult = tau(&p)?;
    let dec: Option<Decomposition> = if pinned {
        match decompose(&p) {
            Ok(d) => Some(d),
            Err(Error::PindownViolation { unit, .. }) => {
                notes.push(format!("t' does not pin down the neighborhood of unit {unit}; tau* and R_n are undefined"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        notes.push("t' does not pin down the neighborhood; tau* and R_n are undefined".into());
        None
    };
    if let Some(d) = &dec {
        let residual = t.tau - (d.tau_star + d.bias_rn);
        if residual.abs() > 1e-9 {
            notes.push(format!("decomposition residual {residual:e}"));
        }
    }

    if wants(Check::CorrectSpecification) {
        let v = check_correct_specification(sc.outcomes.as_dyn(), &sc.contexts, &sc.spec.exposure, &sc.net, cap)?;
        assumptions.push(record(Check::CorrectSpecification, &v, |w| w));
    }
    if wants(Check::KLocality) {
        let k = sc.k_prime.expect("validated on load");
        let v = check_k_locality(sc.outcomes.as_dyn(), &sc.contexts, &sc.net, k, cap)?;
        assumptions.push(record(Check::KLocality, &v, |w| json!({"k_prime": k, "detail": w})));
        let radius = sc.spec.exposure.radius(&sc.net);
        if v.holds() && radius >= k {
            if let Some(d) = &dec {
                if (t.tau - d.tau_star).abs() > EXACT_TOL {
                    notes.push(format!("outcomes are {k}-local yet tau != tau*"));
                }
            }
        }
    }

    let mut criteria = Vec::new();
    for kind in crate::estimands::ComparisonKind::ALL {
        if wants(Check::Sign(kind)) {
            criteria.push(sign_verdict(kind, &p, t.clone())?);
        }
    }

    let ani = if wants(Check::Ani) {
        let fam = sc.outcomes.structural().expect("validated on load");
        Some(witness(&ani_bias_check(fam, &sc.contexts, &sc.mechanism, &sc.spec, cap)?))
    } else {
        None
    };

    let games = sc
        .games
        .iter()
        .map(|g| {
            json!({
                "context": g.context,
                "marginals": g.solution.mechanism.marginals(),
                "profile": g.solution.profile,
                "multiple_equilibria": g.solution.multiple_equilibria,
            })
        })
        .collect::<Vec<_>>();
    if sc.games.iter().any(|g| g.solution.multiple_equilibria.is_some()) {
        notes.push("the take-up game has several equilibria; the one reached from no adoption is used".into());
    }

    let per_unit = t
        .per_unit
        .iter()
        .map(|u| {
            let term = dec.as_ref().and_then(|d| d.per_unit.iter().find(|x| x.unit == u.unit));
            UnitRow {
                unit: u.unit,
                contrast: u.contrast,
                delta: term.map(|x| x.delta.to_string()),
                tau_star: term.map(|x| x.tau_star),
                bias_rn: term.map(|x| x.bias_rn),
            }
        })
        .collect();

    Ok(Report {
        tool: TOOL_VERSION,
        scenario: sc.name.clone(),
        digest: sc.digest.clone(),
        seed: flags.seed.unwrap_or(sc.seed),
        n: sc.net.n(),
        exposure: sc.spec.exposure.to_string(),
        t: sc.spec.t.to_string(),
        t_prime: sc.spec.t_prime.to_string(),
        subpopulation: sc.spec.subpop.external(),
        tau: t.tau,
        tau_star: dec.as_ref().map(|d| d.tau_star),
        r_n: dec.as_ref().map(|d| d.bias_rn),
        per_unit,
        assumptions,
        criteria,
        ani,
        games,
        notes,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
