//! Golden reproductions of the worked examples.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::experiments::{run_coupling, CouplingConfig};
use super::{bundled, run, Report, RunFlags};
use crate::error::{Error, Result};
use crate::estimands::{check_sign_preservation, tau, ComparisonKind, Premise, Problem, SignOutcome};
use crate::mechanisms::{AssignmentLaw, Distribution, Mechanism};
use crate::netcore::{Assignment, EnumerationCap};
use crate::outcomes::EXACT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Example {
    #[serde(rename = "dim-2.1")]
    Dim,
    #[serde(rename = "spill-3.2")]
    Spillover,
    #[serde(rename = "ordered-4.1")]
    Ordered,
    #[serde(rename = "coupling-thm3")]
    Coupling,
    #[serde(rename = "game-prop1")]
    Game,
}

impl Example {
    pub const ALL: [Example; 5] = [Example::Dim, Example::Spillover, Example::Ordered, Example::Coupling, Example::Game];

    pub fn id(self) -> &'static str {
        match self {
            Example::Dim => "dim-2.1",
            Example::Spillover => "spill-3.2",
            Example::Ordered => "ordered-4.1",
            Example::Coupling => "coupling-thm3",
            Example::Game => "game-prop1",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::Parse(format!("unknown example {s:?}; expected one of dim-2.1, spill-3.2, ordered-4.1, coupling-thm3, game-prop1")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub example: Example,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Report>,
}

impl Reproduction {
    /// One line per assertion, with the expected value on failures.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.example, if self.passed { "PASS" } else { "FAIL" });
        for a in &self.assertions {
            if a.pass {
                s.push_str(&format!("  ok    {} = {}\n", a.name, a.actual));
            } else {
                s.push_str(&format!("  FAIL  {}\n    - expected {}\n    + actual   {}\n", a.name, a.expected, a.actual));
            }
        }
        s
    }
}

#[derive(Default)]
struct Asserts(Vec<Assertion>);

impl Asserts {
    fn close(&mut self, name: &str, expected: f64, actual: f64) {
        self.0.push(Assertion {
            name: name.into(),
            expected: format!("{expected}"),
            actual: format!("{actual}"),
            pass: (expected - actual).abs() <= EXACT_TOL,
        });
    }

    fn eq<T: fmt::Debug + PartialEq>(&mut self, name: &str, expected: T, actual: T) {
        self.0.push(Assertion {
            name: name.into(),
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
            pass: expected == actual,
        });
    }
}

pub fn reproduce(example: Example) -> Result<Reproduction> {
    let mut a = Asserts::default();
    let report = match example {
        Example::Dim => Some(dim(&mut a)?),
        Example::Spillover => Some(spillover(&mut a)?),
        Example::Ordered => Some(ordered(&mut a)?),
        Example::Coupling => {
            coupling(&mut a)?;
            None
        }
        Example::Game => Some(game(&mut a)?),
    };
    Ok(Reproduction {
        example,
        passed: a.0.iter().all(|x| x.pass),
        assertions: a.0,
        report,
    })
}

fn verdict(r: &Report, kind: ComparisonKind) -> Option<SignOutcome> {
    r.criterion(kind).map(|c| c.verdict)
}

fn dim(a: &mut Asserts) -> Result<Report> {
    let sc = bundled("dyad_dim")?;
    let r = run(&sc, RunFlags::default())?;
    a.close("tau(1,0)", -1.0, r.tau);
    let partial = r.criterion(ComparisonKind::Partial);
    let (lo, hi) = partial
        .and_then(|c| Some((c.min_entry.as_ref()?.value, c.max_entry.as_ref()?.value)))
        .unwrap_or((f64::NAN, f64::NAN));
    a.close("smallest unit-level effect", 1.0, lo);
    a.close("largest unit-level effect", 1.0, hi);
    a.eq("partial verdict", Some(SignOutcome::Violation), verdict(&r, ComparisonKind::Partial));

    // symmetric laws with P(D=(1,0) | D_1=1) = p2, P(D=(0,1) | D_1=0) = p3
    let p_ = Problem::new(&sc.net, &sc.contexts, sc.outcomes.as_dyn(), &sc.mechanism, &sc.spec)?;
    for (p2, p3) in [(1.0, 1.0), (0.5, 0.5), (0.25, 0.75), (0.8, 0.2), (0.6, 0.9)] {
        let (p4, p1) = (1.0 - p2, 1.0 - p3);
        let (q11, q00) = (p4 / p2, p1 / p3);
        let z = 2.0 + q11 + q00;
        let at = |s: &str| Assignment::parse(s).expect("literal");
        let law = AssignmentLaw::Explicit(Distribution::new(
            2,
            vec![(at("00"), q00 / z), (at("10"), 1.0 / z), (at("01"), 1.0 / z), (at("11"), q11 / z)],
        )?);
        let mech = Mechanism::new(vec![law])?;
        let p = Problem { mechanism: &mech, ..p_ };
        a.close(
            &format!("tau = 3 p4 + p2 - 2 p3 at (p2, p3, p4) = ({p2}, {p3}, {p4})"),
            3.0 * p4 + p2 - 2.0 * p3,
            tau(&p)?.tau,
        );
    }
    Ok(r)
}

fn spillover(a: &mut Asserts) -> Result<Report> {
    let r = run(&bundled("triad_spillover")?, RunFlags::default())?;
    a.eq("subpopulation", vec![1, 3], r.subpopulation.clone());
    a.close("tau((1,1),(1,0))", -1.0, r.tau);
    // by hand: only d = (1,1,0) has T_1 = (1,1), and Y_1(110) - Y_1(100) = 1;
    // unit 3 is symmetric
    a.close("tau*", 1.0, r.tau_star.unwrap_or(f64::NAN));
    a.close("R_n", -2.0, r.r_n.unwrap_or(f64::NAN));
    a.close("tau - tau* - R_n", 0.0, r.tau - r.tau_star.unwrap_or(f64::NAN) - r.r_n.unwrap_or(f64::NAN));
    a.eq("general verdict", Some(SignOutcome::Vacuous), verdict(&r, ComparisonKind::General));
    a.eq("partial verdict", Some(SignOutcome::Violation), verdict(&r, ComparisonKind::Partial));
    Ok(r)
}

fn ordered(a: &mut Asserts) -> Result<Report> {
    let r = run(&bundled("quad_ordered")?, RunFlags::default())?;
    a.close("tau((1,2),(1,1))", -1.0, r.tau);
    a.eq("partial verdict", Some(SignOutcome::Vacuous), verdict(&r, ComparisonKind::Partial));
    let witness = r.criterion(ComparisonKind::Partial).and_then(|c| match &c.premise {
        Premise::Mixed { negative, .. } => Some((negative.d.to_string(), negative.d_prime.to_string(), negative.value)),
        _ => None,
    });
    a.eq("negative partial entry", Some(("1110".to_string(), "1001".to_string(), -1.0)), witness);
    a.eq("ordered verdict", Some(SignOutcome::Violation), verdict(&r, ComparisonKind::Ordered));
    Ok(r)
}

fn coupling(a: &mut Asserts) -> Result<()> {
    let cfg = CouplingConfig::from_toml(super::BUNDLED_COUPLING_STAR)?;
    let rep = run_coupling(&cfg)?;
    a.eq("configurations", 6, rep.rows.len());
    a.close("largest total variation to the conditional laws", 0.0, rep.max_tv);
    a.eq("sampled pairs", true, rep.total_samples >= cfg.samples);
    a.eq("order violations", 0, rep.order_violations);
    Ok(())
}

fn game(a: &mut Asserts) -> Result<Report> {
    let sc = bundled("game_prop1")?;
    let sol = &sc.games.first().ok_or_else(|| Error::Precondition("no game in scenario".into()))?.solution;
    a.eq("equilibrium profile", vec![vec![false, true], vec![false, true]], sol.profile.clone());
    a.eq("adoption probabilities", vec![0.5, 0.5], sol.mechanism.marginals());
    a.eq("second equilibrium", Some(vec![vec![true, true], vec![true, true]]), sol.multiple_equilibria.clone());
    let r = run(&sc, RunFlags::default())?;
    let label = |name| r.assumption(name).map(|x| x.verdict);
    a.eq("unit_independence", Some("HOLDS"), label("unit_independence"));
    a.eq("ci_selection", Some("HOLDS"), label("ci_selection"));
    // the induced mechanism is a product law, so the partial criterion holds
    let p = Problem::new(&sc.net, &sc.contexts, sc.outcomes.as_dyn(), &sc.mechanism, &sc.spec)?
        .with_cap(EnumerationCap::MAX);
    let v = check_sign_preservation(ComparisonKind::Partial, &p)?;
    a.eq("partial verdict", false, v.is_violation());
    Ok(r)
}
