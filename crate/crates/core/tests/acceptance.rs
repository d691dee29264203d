//! Acceptance suite: one PASS/FAIL line per criterion, then a non-zero
//! exit if any failed. Runs without the libtest harness so the lines
//! always reach the terminal.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use exposure_lab::estimands::{
    ani_bias_check, check_sign_preservation, comparison_set, decompose, tau, ComparisonKind, EstimandSpec, Premise,
    Problem, SignOutcome,
};
use exposure_lab::exposures::{subpopulation, ExposureSpec, ExposureValue, IsoClass, IsoReference, SubpopulationRule};
use exposure_lab::mechanisms::{
    check_ci_selection, check_unit_independence, event_mass, exact_coupling_law, solve_incomplete_info_game,
    AssignmentLaw, CouplingSpec, Distribution, Mechanism, SelectionGame, TypeAtom, Utility,
};
use exposure_lab::netcore::{Assignment, EnumerationCap, Network, SubWord, UnitSet};
use exposure_lab::outcomes::{ContextSet, OutcomeTable, PotentialOutcomes, StructuralFamily};
use exposure_lab::scenario::{
    self, bundled, coupling_network, parse_scenario, parse_search_config, reproduce, run, run_coupling, run_search,
    CouplingConfig, CouplingGraph, Example, GraphSpec, RunFlags,
};
use exposure_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;
const CAP: EnumerationCap = EnumerationCap::MAX;

type Outcome = Result<(bool, String), Error>;

struct Check {
    id: usize,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn main() {
    let checks = [
        Check { id: 1, limit: secs(1), run: dim_golden },
        Check { id: 2, limit: secs(1), run: spillover_golden },
        Check { id: 3, limit: secs(1), run: ordered_golden },
        Check { id: 4, limit: secs(60), run: independent_treatment_suite },
        Check { id: 5, limit: None, run: decomposition_suite },
        Check { id: 6, limit: secs(60), run: coupling_suite },
        Check { id: 7, limit: None, run: game_suite },
        Check { id: 8, limit: None, run: ani_suite },
        Check { id: 9, limit: secs(300), run: search_controls },
        Check { id: 10, limit: None, run: determinism },
    ];
    let mut failed = 0;
    for c in checks {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = c.limit.map_or(true, |l| elapsed <= l);
        let pass = ok && in_time;
        let budget = c.limit.map_or(String::new(), |l| format!(" (limit {} s)", l.as_secs()));
        let late = if in_time { "" } else { " TOO SLOW" };
        println!(
            "criterion {:>2}: {} [{:.3} s{budget}{late}] {detail}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

// ---------------------------------------------------------------------
// brute-force oracles, written against bare bitmasks

/// Single-context tau, tau* and R_n by direct summation over all `2^n`
/// assignments. `nbhd(i)` is the exposure neighborhood as a mask; tau*
/// and R_n are `None` when `t'` does not pin the neighborhood down.
struct Oracle {
    tau: f64,
    split: Option<(f64, f64)>,
}

fn oracle<K: PartialEq>(
    n: usize,
    members: &[usize],
    prob: impl Fn(u32) -> f64,
    y: impl Fn(usize, u32) -> f64,
    expo: impl Fn(usize, u32) -> K,
    nbhd: impl Fn(usize) -> u32,
    t: &K,
    tp: &K,
) -> Oracle {
    let all = 0..1u32 << n;
    let mut total = 0.0;
    let (mut star, mut rn) = (0.0, 0.0);
    let mut pinned = true;
    for &i in members {
        let cond = |v: &K| {
            let w: Vec<f64> = all.clone().map(|d| if expo(i, d) == *v { prob(d) } else { 0.0 }).collect();
            let mass: f64 = w.iter().sum();
            w.into_iter().map(|x| x / mass).collect::<Vec<f64>>()
        };
        let (pt, ptp) = (cond(t), cond(tp));
        let (pt, ptp) = (|d: u32| pt[d as usize], |d: u32| ptp[d as usize]);
        total += all.clone().map(|d| y(i, d) * (pt(d) - ptp(d))).sum::<f64>();
        let nb = nbhd(i);
        let patterns: BTreeSet<u32> = all.clone().filter(|&d| expo(i, d) == *tp).map(|d| d & nb).collect();
        if patterns.len() != 1 {
            pinned = false;
            continue;
        }
        let fill = *patterns.first().unwrap();
        let swap = |d: u32| (d & !nb) | fill;
        star += all.clone().map(|d| (y(i, d) - y(i, swap(d))) * pt(d)).sum::<f64>();
        rn += all.clone().map(|d| y(i, swap(d)) * (pt(d) - ptp(d))).sum::<f64>();
    }
    let m = members.len() as f64;
    Oracle {
        tau: total / m,
        split: pinned.then(|| (star / m, rn / m)),
    }
}

fn neighbor_mask(net: &Network, i: usize) -> u32 {
    (0..net.n()).filter(|&j| net.is_linked(i, j)).fold(0, |m, j| m | 1 << j)
}

/// `(own treatment, treated neighbors)`.
fn count_exposure(net: &Network, i: usize, d: u32) -> (bool, u32) {
    (d >> i & 1 == 1, (d & neighbor_mask(net, i)).count_ones())
}

fn outcome(y: &dyn PotentialOutcomes, n: usize) -> impl Fn(usize, u32) -> f64 + '_ {
    move |i, d| y.mean_outcome(0, i, Assignment::new(d, n)).unwrap()
}

fn count(own: bool, c: u32) -> ExposureValue {
    ExposureValue::Count { own, count: c }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn random_network(rng: &mut ChaCha8Rng, n: usize) -> Network {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    Network::from_edges(n, &edges).unwrap()
}

fn product_prob(p: &[f64], d: u32) -> f64 {
    p.iter().enumerate().map(|(j, &q)| if d >> j & 1 == 1 { q } else { 1.0 - q }).product()
}

// ---------------------------------------------------------------------

fn dim_golden() -> Outcome {
    let rep = reproduce(Example::Dim)?;
    let sc = bundled("dyad_dim")?;
    let r = rep.report.as_ref().expect("dim reproduction carries a report");
    let p = Problem::new(&sc.net, &sc.contexts, sc.outcomes.as_dyn(), &sc.mechanism, &sc.spec)?;
    let mut entries = Vec::new();
    for i in sc.spec.subpop.iter() {
        entries.extend(comparison_set(ComparisonKind::Partial, &p, i)?.values());
    }
    let treated_once = matches!(sc.mechanism.law(0), AssignmentLaw::CompleteRandomization { n: 2, treated: 1 });
    let verdict = r.criterion(ComparisonKind::Partial).map(|c| c.verdict);

    // the same closed form from the oracle, on the symmetric laws with
    // P(10 | d_1 = 1) = p2 and P(01 | d_1 = 0) = p3
    let y = outcome(sc.outcomes.as_dyn(), 2);
    let mut closed_form = true;
    for (p2, p3) in [(1.0, 1.0), (0.5, 0.5), (0.25, 0.75), (0.8, 0.2), (0.6, 0.9)] {
        let (p4, p1) = (1.0 - p2, 1.0 - p3);
        let (q11, q00) = (p4 / p2, p1 / p3);
        let z = 2.0 + q11 + q00;
        let prob = |d: u32| [q00, 1.0, 1.0, q11][d as usize] / z;
        let o = oracle(2, &[0, 1], prob, &y, |i, d| d >> i & 1, |i| 1 << i, &1, &0);
        closed_form &= close(o.tau, 3.0 * p4 + p2 - 2.0 * p3);
    }
    let base = oracle(2, &[0, 1], |d| sc.mechanism.law(0).prob(Assignment::new(d, 2)), &y, |i, d| d >> i & 1, |i| 1 << i, &1, &0);

    let ok = rep.passed
        && treated_once
        && close(r.tau, -1.0)
        && close(base.tau, -1.0)
        && !entries.is_empty()
        && entries.iter().all(|&v| v == 1.0)
        && verdict == Some(SignOutcome::Violation)
        && closed_form;
    Ok((
        ok,
        format!(
            "tau = {} (oracle {}), {} entries all +1: {}, verdict {:?}, closed form at 5 points: {closed_form}",
            r.tau,
            base.tau,
            entries.len(),
            entries.iter().all(|&v| v == 1.0),
            verdict
        ),
    ))
}

fn spillover_golden() -> Outcome {
    let rep = reproduce(Example::Spillover)?;
    let r = rep.report.as_ref().expect("spillover reproduction carries a report");
    let sc = bundled("triad_spillover")?;
    let members: Vec<usize> = sc.spec.subpop.iter().collect();
    let o = oracle(
        3,
        &members,
        |d| sc.mechanism.law(0).prob(Assignment::new(d, 3)),
        outcome(sc.outcomes.as_dyn(), 3),
        |i, d| count_exposure(&sc.net, i, d),
        |i| neighbor_mask(&sc.net, i) | 1 << i,
        &(true, 1),
        &(true, 0),
    );
    let (star, rn) = o.split.unwrap_or((f64::NAN, f64::NAN));
    let (ts, rs) = (r.tau_star.unwrap_or(f64::NAN), r.r_n.unwrap_or(f64::NAN));
    let general = r.criterion(ComparisonKind::General).map(|c| c.verdict);
    let partial = r.criterion(ComparisonKind::Partial).map(|c| c.verdict);
    let ok = rep.passed
        && r.subpopulation == [1, 3]
        && close(r.tau, -1.0)
        && close(ts, 1.0)
        && close(r.tau, ts + rs)
        && close(o.tau, r.tau)
        && close(star, ts)
        && close(rn, rs)
        && general == Some(SignOutcome::Vacuous)
        && partial == Some(SignOutcome::Violation);
    Ok((
        ok,
        format!(
            "M = {:?}, tau = {}, tau* = {ts} (oracle {star}), R_n = {rs} (oracle {rn}), general {:?}, partial {:?}",
            r.subpopulation, r.tau, general, partial
        ),
    ))
}

fn ordered_golden() -> Outcome {
    let rep = reproduce(Example::Ordered)?;
    let r = rep.report.as_ref().expect("ordered reproduction carries a report");
    let sc = bundled("quad_ordered")?;
    let members: Vec<usize> = sc.spec.subpop.iter().collect();
    let o = oracle(
        4,
        &members,
        |d| sc.mechanism.law(0).prob(Assignment::new(d, 4)),
        outcome(sc.outcomes.as_dyn(), 4),
        |i, d| count_exposure(&sc.net, i, d),
        |i| neighbor_mask(&sc.net, i) | 1 << i,
        &(true, 2),
        &(true, 1),
    );
    let partial = r.criterion(ComparisonKind::Partial);
    let witness = partial.and_then(|c| match &c.premise {
        Premise::Mixed { negative, .. } => Some((negative.unit, negative.d.to_string(), negative.d_prime.to_string(), negative.value)),
        _ => None,
    });
    let ordered = r.criterion(ComparisonKind::Ordered).map(|c| c.verdict);
    let ok = rep.passed
        && close(r.tau, -1.0)
        && close(o.tau, -1.0)
        && partial.map(|c| c.verdict) == Some(SignOutcome::Vacuous)
        && witness == Some((1, "1110".into(), "1001".into(), -1.0))
        && ordered == Some(SignOutcome::Violation);
    Ok((
        ok,
        format!(
            "tau = {} (oracle {}), partial {:?} with negative entry {:?}, ordered {:?}",
            r.tau,
            o.tau,
            partial.map(|c| c.verdict),
            witness,
            ordered
        ),
    ))
}

fn independent_treatment_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7431);
    let contexts = ContextSet::single();
    let (mut done, mut worst_rn, mut worst_oracle, mut violations) = (0, 0.0f64, 0.0f64, 0);
    while done < 1000 {
        let n = rng.gen_range(2..=6);
        let net = random_network(&mut rng, n);
        let max_deg = (0..n).map(|i| net.degree(i)).max().unwrap();
        if max_deg == 0 {
            continue;
        }
        let own = rng.gen_bool(0.5);
        let k = rng.gen_range(1..=max_deg);
        let members: Vec<usize> = (0..n).filter(|&i| net.degree(i) >= k).collect();
        let subpop = UnitSet::from_mask(members.iter().fold(0, |m, &i| m | 1 << i));
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let y = OutcomeTable::from_fn(n, 1, |_, _, _| rng.gen_range(-5.0..5.0));
        let spec = EstimandSpec::new(ExposureSpec::NeighborCount, count(own, k as u32), count(own, 0), subpop)?;
        let mech = Mechanism::new(vec![AssignmentLaw::ProductBernoulli { p: p.clone() }])?;
        let pr = Problem::new(&net, &contexts, &y, &mech, &spec)?;
        let t = tau(&pr)?;
        let dec = decompose(&pr)?;
        worst_rn = worst_rn.max(dec.bias_rn.abs());
        if check_sign_preservation(ComparisonKind::Partial, &pr)?.verdict == SignOutcome::Violation {
            violations += 1;
        }
        let o = oracle(
            n,
            &members,
            |d| product_prob(&p, d),
            outcome(&y, n),
            |i, d| count_exposure(&net, i, d),
            |i| neighbor_mask(&net, i) | 1 << i,
            &(own, k as u32),
            &(own, 0),
        );
        let (star, rn) = o.split.expect("a zero count pins the neighborhood");
        worst_oracle = worst_oracle.max((o.tau - t.tau).abs()).max((star - dec.tau_star).abs()).max(rn.abs());
        done += 1;
    }
    let ok = worst_rn <= TOL && violations == 0 && worst_oracle <= 1e-9;
    Ok((
        ok,
        format!("{done} scenarios: max |R_n| = {worst_rn:e}, partial violations = {violations}, max oracle gap = {worst_oracle:e}"),
    ))
}

fn decomposition_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11);
    let contexts = ContextSet::single();
    let (mut done, mut skipped) = (0, 0);
    let (mut worst_identity, mut worst_oracle, mut nonzero_rn) = (0.0f64, 0.0f64, 0);
    while done < 1000 {
        let n = rng.gen_range(2..=6);
        let net = random_network(&mut rng, n);
        let with_links: Vec<usize> = (0..n).filter(|&i| net.degree(i) > 0).collect();
        if with_links.is_empty() {
            continue;
        }
        // baseline either "no treated neighbors" or "all neighbors treated"
        let (own_t, own_tp) = (rng.gen_bool(0.5), rng.gen_bool(0.5));
        let (members, t, tp) = if rng.gen_bool(0.5) {
            let max_deg = with_links.iter().map(|&i| net.degree(i)).max().unwrap();
            let k = rng.gen_range(1..=max_deg);
            let m: Vec<usize> = (0..n).filter(|&i| net.degree(i) >= k).collect();
            (m, (own_t, k as u32), (own_tp, 0))
        } else {
            let g = net.degree(with_links[rng.gen_range(0..with_links.len())]);
            let m: Vec<usize> = (0..n).filter(|&i| net.degree(i) == g).collect();
            (m, (own_t, rng.gen_range(0..g) as u32), (own_tp, g as u32))
        };
        // sparse, arbitrary dependence; every cell has a 70% chance of mass
        let weights: Vec<f64> = (0..1u32 << n).map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.0..1.0) } else { 0.0 }).collect();
        let z: f64 = weights.iter().sum();
        if z == 0.0 {
            continue;
        }
        let rows = (0..1u32 << n)
            .filter(|&d| weights[d as usize] > 0.0)
            .map(|d| (Assignment::new(d, n), weights[d as usize] / z))
            .collect();
        let law = AssignmentLaw::Explicit(Distribution::new(n, rows)?);
        let y = OutcomeTable::from_fn(n, 1, |_, _, _| rng.gen_range(-5.0..5.0));
        let subpop = UnitSet::from_mask(members.iter().fold(0, |m, &i| m | 1 << i));
        let spec = EstimandSpec::new(ExposureSpec::NeighborCount, count(t.0, t.1), count(tp.0, tp.1), subpop)?;
        let mech = Mechanism::new(vec![law.clone()])?;
        let pr = Problem::new(&net, &contexts, &y, &mech, &spec)?;
        let tr = match tau(&pr) {
            Ok(tr) => tr,
            Err(Error::OverlapViolation { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let dec = decompose(&pr)?;
        worst_identity = worst_identity.max((tr.tau - dec.tau_star - dec.bias_rn).abs());
        nonzero_rn += usize::from(dec.bias_rn.abs() > 1e-9);
        let o = oracle(
            n,
            &members,
            |d| law.prob(Assignment::new(d, n)),
            outcome(&y, n),
            |i, d| count_exposure(&net, i, d),
            |i| neighbor_mask(&net, i) | 1 << i,
            &t,
            &tp,
        );
        let (star, rn) = o.split.expect("both baselines pin the neighborhood");
        worst_oracle = worst_oracle.max((o.tau - tr.tau).abs()).max((star - dec.tau_star).abs()).max((rn - dec.bias_rn).abs());
        done += 1;
    }
    let ok = worst_identity <= TOL && worst_oracle <= 1e-9;
    Ok((
        ok,
        format!(
            "{done} scenarios ({skipped} without overlap redrawn, {nonzero_rn} with R_n != 0): \
             max |tau - tau* - R_n| = {worst_identity:e}, max oracle gap = {worst_oracle:e}"
        ),
    ))
}

/// `P(d | d_0 = own, exactly c treated neighbors of unit 0)` under iid
/// Bernoulli(p) treatment.
fn ego_conditional(net: &Network, p: f64, own: bool, c: usize, d: u32) -> f64 {
    let n = net.n();
    let q = vec![p; n];
    let hit = |d: u32| count_exposure(net, 0, d) == (own, c as u32);
    let mass: f64 = (0..1u32 << n).filter(|&x| hit(x)).map(|x| product_prob(&q, x)).sum();
    if hit(d) { product_prob(&q, d) / mass } else { 0.0 }
}

fn coupling_suite() -> Outcome {
    // (tau, tau') pairs per gamma: 1 + 3 + 6 + 10, for 2 graphs, 4 p's, 2 ego values
    let expected_rows = 2 * 20 * 4 * 2;
    let cfg = CouplingConfig {
        graphs: vec![
            GraphSpec { kind: CouplingGraph::Star, gamma: vec![2, 3, 4, 5] },
            GraphSpec { kind: CouplingGraph::Clique, gamma: vec![2, 3, 4, 5] },
        ],
        p: vec![0.1, 0.3, 0.5, 0.9],
        // the sample budget is split over configurations; give each its own 10^5
        samples: 100_000 * expected_rows as u64,
        seed: 5,
        d: None,
        outside: 0,
        heterogeneous_spread: None,
    };
    let rep = run_coupling(&cfg)?;

    let mut oracle_tv = 0.0f64;
    for row in &rep.rows {
        let net = coupling_network(row.graph, row.gamma, 0)?;
        let spec = CouplingSpec { ego: 0, d: row.d, tau_hi: row.tau_hi, tau_lo: row.tau_lo };
        let exact = exact_coupling_law(&net, spec, row.p, CAP)?;
        let n = net.n();
        let (mut lo_gap, mut hi_gap) = (0.0, 0.0);
        for d in 0..1u32 << n {
            let a = Assignment::new(d, n);
            let joint_lo: f64 = exact.joint.iter().filter(|(pr, _)| pr.low == a).map(|(_, q)| q).sum();
            let joint_hi: f64 = exact.joint.iter().filter(|(pr, _)| pr.high == a).map(|(_, q)| q).sum();
            lo_gap += (joint_lo - ego_conditional(&net, row.p, row.d, row.tau_lo, d)).abs();
            hi_gap += (joint_hi - ego_conditional(&net, row.p, row.d, row.tau_hi, d)).abs();
        }
        oracle_tv = oracle_tv.max(lo_gap / 2.0).max(hi_gap / 2.0);
    }
    let full = run_coupling(&CouplingConfig::from_toml(scenario::BUNDLED_COUPLING_FULL)?)?;
    let ok = rep.passed
        && rep.rows.len() == expected_rows
        && rep.max_tv <= TOL
        && oracle_tv <= TOL
        && rep.order_violations == 0
        && rep.rows.iter().all(|r| r.samples >= 100_000)
        && full.passed
        && full.order_violations == 0;
    Ok((
        ok,
        format!(
            "{} configurations, max TV {:e} (oracle {:e}), {} order violations in {} samples; \
             bundled sweep: {} configurations, {} samples, passed {}",
            rep.rows.len(),
            rep.max_tv,
            oracle_tv,
            rep.order_violations,
            rep.total_samples,
            full.rows.len(),
            full.total_samples,
            full.passed
        ),
    ))
}

/// Every pure Bayesian equilibrium of a linear-utility game, by listing
/// all type-contingent strategy profiles.
fn all_equilibria(net: &Network, types: &[Vec<TypeAtom>], intercept: f64, peer: f64) -> Vec<Vec<Vec<bool>>> {
    let sizes: Vec<usize> = types.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().sum();
    let mut found = Vec::new();
    for bits in 0..1u32 << total {
        let mut k = 0;
        let profile: Vec<Vec<bool>> = sizes
            .iter()
            .map(|&s| {
                let acts = (k..k + s).map(|b| bits >> b & 1 == 1).collect();
                k += s;
                acts
            })
            .collect();
        let q: Vec<f64> = types
            .iter()
            .zip(&profile)
            .map(|(ts, acts)| ts.iter().zip(acts).filter(|(_, &a)| a).map(|(t, _)| t.prob).sum())
            .collect();
        let stable = (0..net.n()).all(|i| {
            let pull: f64 = (0..net.n()).filter(|&j| net.is_linked(i, j)).map(|j| q[j]).sum();
            types[i].iter().zip(&profile[i]).all(|(t, &a)| a == (intercept + peer * pull + t.nu > 0.0))
        });
        if stable {
            found.push(profile);
        }
    }
    found
}

fn game_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a3e);
    let (mut solved, mut cycles, mut ci_checks, mut exhaustive) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    while solved < 100 {
        let n = rng.gen_range(2..=5);
        let net = random_network(&mut rng, n);
        let types: Vec<Vec<TypeAtom>> = (0..n)
            .map(|_| {
                let k = rng.gen_range(1..=3);
                let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
                let z: f64 = w.iter().sum();
                w.iter().map(|&x| TypeAtom { nu: rng.gen_range(-1.0..1.0), prob: x / z }).collect()
            })
            .collect();
        let (intercept, peer) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.5..1.5));
        let g = SelectionGame::new(net.clone(), types.clone(), Utility::Linear { intercept, peer })?;
        let sol = match solve_incomplete_info_game(&g, CAP) {
            Ok(s) => s,
            Err(Error::NoConvergence { .. }) => {
                cycles += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        solved += 1;
        let law = &sol.mechanism;
        let q = law.marginals();
        let product = (0..1u32 << n).all(|d| (law.prob(Assignment::new(d, n)) - product_prob(&q, d)).abs() <= TOL);
        if !product || !check_unit_independence(law, CAP)?.holds() {
            failures.push(format!("game {solved}: not a product law"));
        }
        for i in 0..n {
            for f in [ExposureSpec::NeighborCount, ExposureSpec::AnyTreatedNeighbor] {
                let ue = f.for_unit(&net, i);
                let values: BTreeSet<String> = (0..1u32 << n).map(|d| ue.value(Assignment::new(d, n)).to_string()).collect();
                let values: Vec<ExposureValue> = values.iter().filter_map(|s| f.parse_value(s)).collect();
                let live: Vec<&ExposureValue> = values.iter().filter(|v| event_mass(law, &ue, v) > 0.0).collect();
                for (a, t) in live.iter().enumerate() {
                    for tp in &live[a + 1..] {
                        ci_checks += 1;
                        if !check_ci_selection(law, &ue, t, tp, "c", CAP)?.holds() {
                            failures.push(format!("game {solved}: CI selection fails for unit {} at ({t}, {tp})", i + 1));
                        }
                    }
                }
            }
        }
        if n <= 3 {
            exhaustive += 1;
            let eqs = all_equilibria(&net, &types, intercept, peer);
            if !eqs.contains(&sol.profile) {
                failures.push(format!("game {solved}: solver profile is not an equilibrium"));
            }
            if let Some(other) = &sol.multiple_equilibria {
                if !eqs.contains(other) {
                    failures.push(format!("game {solved}: second profile is not an equilibrium"));
                }
            }
        }
    }
    let ok = failures.is_empty();
    Ok((
        ok,
        format!(
            "{solved} games solved ({cycles} cycling redrawn), {ci_checks} CI checks, {exhaustive} matched exhaustively{}",
            if ok { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    ))
}

/// Exposures of radius 0, 1 and 2 on the 6-path with their estimands.
fn path_exposures(net: &Network) -> Result<Vec<EstimandSpec>, Error> {
    let dim = EstimandSpec::new(
        ExposureSpec::Dim,
        ExposureValue::Treatment(true),
        ExposureValue::Treatment(false),
        net.units(),
    )?;
    let nc = ExposureSpec::NeighborCount;
    let ones = subpopulation(&nc, net, &SubpopulationRule::AtLeastOneNeighbor)?.units;
    let counts = EstimandSpec::new(nc, count(true, 1), count(true, 0), ones)?;
    // the 2-ball of an interior unit is a 5-path; the ego sits in the middle
    let five = Network::path(5)?;
    let reference = IsoReference::new(
        2,
        five,
        SubWord::parse("01100").unwrap(),
        SubWord::parse("00100").unwrap(),
        Some(2),
    )?;
    let iso = ExposureSpec::SubnetworkIso(reference);
    let interior = subpopulation(&iso, net, &SubpopulationRule::IsoClass)?.units;
    let iso = EstimandSpec::new(iso, ExposureValue::Iso(IsoClass::Target), ExposureValue::Iso(IsoClass::Baseline), interior)?;
    Ok(vec![dim, counts, iso])
}

fn ani_suite() -> Outcome {
    let net = Network::path(6)?;
    let contexts = ContextSet::single();
    let mech = Mechanism::new(vec![AssignmentLaw::CompleteRandomization { n: 6, treated: 2 }])?;
    let fam = StructuralFamily::distance_decay(net.clone(), 0.5);
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in path_exposures(&net)? {
        let rep = ani_bias_check(&fam, &contexts, &mech, &spec, CAP)?;
        ok &= rep.radius <= 2 && rep.gap <= rep.gamma_hat + TOL && rep.within_gamma;
        parts.push(format!("K={}: |tau - tau*| = {:.6} <= gamma_hat = {:.6}", rep.radius, rep.gap, rep.gamma_hat));
    }

    // outcomes that only see N(i, K') leave no gap once K >= K'
    let mut rng = ChaCha8Rng::seed_from_u64(0x10ca1);
    let mut worst = 0.0f64;
    let mut families = 0;
    for spec in path_exposures(&net)? {
        let k = spec.exposure.radius(&net);
        for k_prime in 0..=k {
            let coef: Vec<f64> = (0..36).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let inter: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let fam = StructuralFamily::k_local(net.clone(), k_prime, move |_, i, d| {
                let lin: f64 = (0..6).filter(|&j| d.get(j)).map(|j| coef[i * 6 + j]).sum();
                lin + inter[i] * f64::from(u8::from(d.get(i))) * d.count() as f64
            });
            let pr = Problem::new(&net, &contexts, &fam, &mech, &spec)?;
            worst = worst.max((tau(&pr)?.tau - decompose(&pr)?.tau_star).abs());
            families += 1;
        }
    }
    ok &= worst <= TOL;
    parts.push(format!("{families} K'-local families with K >= K': max |tau - tau*| = {worst:e}"));
    Ok((ok, parts.join("; ")))
}

/// Monotone in the treatment vector for every unit.
fn monotone(y: &dyn PotentialOutcomes, n: usize) -> bool {
    (0..n).all(|i| {
        (0..1u32 << n).all(|d| (0..n).filter(|j| d >> j & 1 == 0).all(|j| {
            y.mean_outcome(0, i, Assignment::new(d, n)).unwrap() <= y.mean_outcome(0, i, Assignment::new(d | 1 << j, n)).unwrap()
        }))
    })
}

fn search_controls() -> Outcome {
    let neg_cfg = parse_search_config(scenario::BUNDLED_SEARCH_PINDOWN, None, None, None)?;
    let negative = run_search(&neg_cfg)?;
    let pos_cfg = parse_search_config(scenario::BUNDLED_SEARCH_OVERALL, None, None, None)?;
    let positive = run_search(&pos_cfg)?;
    let negative_ok = neg_cfg.budget == 100_000
        && neg_cfg.kind == ComparisonKind::Partial
        && matches!(neg_cfg.mechanism, exposure_lab::estimands::MechanismFamily::Bernoulli { .. })
        && negative.found.is_empty();
    let fraction = pos_cfg.budget <= 100_000
        && pos_cfg.exposure == ExposureSpec::FractionTreated
        && pos_cfg.t == ExposureValue::fraction(3, 4)
        && pos_cfg.t_prime == ExposureValue::fraction(1, 4);

    // replay the first hit from its own scenario text and recheck it by hand
    let mut replay = String::from("no hit");
    let mut positive_ok = false;
    if let Some(hit) = positive.found.first() {
        let sc = parse_scenario(&hit.scenario, "hit", CAP)?;
        let r = run(&sc, RunFlags::default())?;
        let n = sc.net.n();
        let members: Vec<usize> = sc.spec.subpop.iter().collect();
        let o = oracle(
            n,
            &members,
            |d| sc.mechanism.law(0).prob(Assignment::new(d, n)),
            outcome(sc.outcomes.as_dyn(), n),
            |_, d| d.count_ones() * 4,
            |_| (1 << n) - 1,
            &(3 * n as u32),
            &(n as u32),
        );
        let mono = monotone(sc.outcomes.as_dyn(), n);
        positive_ok = hit.n == 4 && n == 4 && hit.tau < 0.0 && close(r.tau, hit.tau) && close(o.tau, hit.tau) && mono;
        replay = format!("first hit #{} on n = {n}: tau(3/4, 1/4) = {} (oracle {}), monotone {mono}", hit.index, hit.tau, o.tau);
    }
    Ok((
        negative_ok && fraction && positive_ok,
        format!(
            "negative control: {} hits in {} candidates; positive control: {} hits in {} candidates, {replay}",
            negative.found.len(),
            negative.evaluated + negative.skipped,
            positive.found.len(),
            positive.evaluated + positive.skipped
        ),
    ))
}

/// Every machine-readable report the tool emits, concatenated.
fn full_suite() -> Result<String, Error> {
    let mut out = Vec::new();
    for e in Example::ALL {
        out.push(serde_json::to_string_pretty(&reproduce(e)?).unwrap());
    }
    for (name, _) in scenario::BUNDLED_SCENARIOS {
        out.push(run(&bundled(name)?, RunFlags::default())?.to_json());
    }
    for text in [scenario::BUNDLED_SEARCH_PINDOWN, scenario::BUNDLED_SEARCH_OVERALL] {
        out.push(serde_json::to_string_pretty(&run_search(&parse_search_config(text, None, None, None)?)?).unwrap());
    }
    for text in [scenario::BUNDLED_COUPLING_STAR, scenario::BUNDLED_COUPLING_FULL] {
        out.push(serde_json::to_string_pretty(&run_coupling(&CouplingConfig::from_toml(text)?)?).unwrap());
    }
    Ok(out.join("\n"))
}

fn determinism() -> Outcome {
    let a = full_suite()?;
    let b = full_suite()?;
    Ok((a == b && !a.is_empty(), format!("two runs, {} bytes each, identical: {}", a.len(), a == b)))
}
