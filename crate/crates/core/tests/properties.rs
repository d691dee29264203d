use exposure_lab::estimands::{
    check_sign_preservation, comparison_set, decompose, tau, ComparisonKind, EstimandSpec, Problem, SignOutcome,
};
use exposure_lab::exposures::{subpopulation, ExposureSpec, ExposureValue, SubpopulationRule};
use exposure_lab::mechanisms::{
    check_ci_selection, check_unit_independence, conditional_law, exact_coupling_law, sample_coupled_pair,
    solve_incomplete_info_game, AssignmentLaw, CouplingSpec, Distribution, Mechanism, SelectionGame, TypeAtom,
    Utility,
};
use exposure_lab::netcore::{Assignment, EnumerationCap, Network, UnitSet};
use exposure_lab::outcomes::{ContextSet, OutcomeTable};
use exposure_lab::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;
const CAP: EnumerationCap = EnumerationCap::MAX;

fn count(own: bool, count: u32) -> ExposureValue {
    ExposureValue::Count { own, count }
}

fn network_from(n: usize, links: &[bool]) -> Network {
    let mut edges = Vec::new();
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            if links[k] {
                edges.push((a, b));
            }
            k += 1;
        }
    }
    Network::from_edges(n, &edges).unwrap()
}

fn networks(max_n: usize) -> impl Strategy<Value = Network> {
    (2..=max_n).prop_flat_map(|n| prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |l| network_from(n, &l)))
}

/// Network, outcome table over every cell, and random draws for the law.
fn scenario(max_n: usize) -> impl Strategy<Value = (Network, OutcomeTable, Vec<u8>, Vec<f64>)> {
    networks(max_n).prop_flat_map(|net| {
        let n = net.n();
        (
            Just(net),
            prop::collection::vec(-3i8..=3, n << n),
            prop::collection::vec(0u8..=3, 1 << n),
            prop::collection::vec(0.05f64..0.95, n),
        )
            .prop_map(move |(net, ys, w, p)| {
                let t = OutcomeTable::from_fn(n, 1, |_, i, d| f64::from(ys[(i << n) + d.bits() as usize]));
                (net, t, w, p)
            })
    })
}

fn explicit(n: usize, weights: &[u8]) -> Option<AssignmentLaw> {
    let total: f64 = weights.iter().map(|&w| f64::from(w)).sum();
    if total == 0.0 {
        return None;
    }
    let rows = weights
        .iter()
        .enumerate()
        .map(|(b, &w)| (Assignment::new(b as u32, n), f64::from(w) / total))
        .collect();
    Some(AssignmentLaw::Explicit(Distribution::new(n, rows).unwrap()))
}

fn neighbor_spec(net: &Network, t: ExposureValue, t_prime: ExposureValue, rule: SubpopulationRule) -> Option<EstimandSpec> {
    let units = subpopulation(&ExposureSpec::NeighborCount, net, &rule).ok()?.units;
    EstimandSpec::new(ExposureSpec::NeighborCount, t, t_prime, units).ok()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conditional_laws_are_normalized_and_supported((net, _, w, _) in scenario(5), unit in 0usize..5, own: bool, c in 0u32..3) {
        let n = net.n();
        let i = unit % n;
        let law = explicit(n, &w);
        prop_assume!(law.is_some());
        let law = law.unwrap();
        let ue = ExposureSpec::NeighborCount.for_unit(&net, i);
        let t = count(own, c);
        match conditional_law(&law, &ue, &t, "c") {
            Ok(cond) => {
                prop_assert!((cond.total() - 1.0).abs() < TOL);
                for &(d, q) in cond.atoms() {
                    prop_assert!(q > 0.0);
                    prop_assert_eq!(ue.value(d), t);
                    prop_assert!(law.prob(d) > 0.0);
                }
            }
            Err(Error::OverlapViolation { unit, .. }) => {
                prop_assert_eq!(unit, i + 1);
                let mass: f64 = Assignment::all(n).filter(|&d| ue.value(d) == t).map(|d| law.prob(d)).sum();
                prop_assert_eq!(mass, 0.0);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn independent_treatment_satisfies_ci_selection((net, _, _, p) in scenario(5), unit in 0usize..5) {
        let i = unit % net.n();
        prop_assume!(net.degree(i) >= 1);
        let law = AssignmentLaw::ProductBernoulli { p };
        prop_assert!(check_unit_independence(&law, CAP).unwrap().holds());
        let ue = ExposureSpec::NeighborCount.for_unit(&net, i);
        let v = check_ci_selection(&law, &ue, &count(true, 1), &count(true, 0), "c", CAP).unwrap();
        prop_assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn game_induced_laws_are_products(
        net in networks(4),
        nus in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 1..=3), 4),
        intercept in -1.0f64..1.0,
        peer in -1.0f64..1.0,
    ) {
        let n = net.n();
        let types: Vec<Vec<TypeAtom>> = nus[..n]
            .iter()
            .map(|v| v.iter().map(|&nu| TypeAtom { nu, prob: 1.0 / v.len() as f64 }).collect())
            .collect();
        let g = SelectionGame::new(net.clone(), types, Utility::Linear { intercept, peer }).unwrap();
        match solve_incomplete_info_game(&g, CAP) {
            Ok(sol) => {
                prop_assert!(g.is_equilibrium(&sol.profile).unwrap());
                prop_assert!(check_unit_independence(&sol.mechanism, CAP).unwrap().holds());
            }
            Err(Error::NoConvergence { period }) => prop_assert!(period >= 2),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn coupled_pairs_are_ordered(gamma in 2usize..=5, clique: bool, p in 0.05f64..0.95, d: bool, seed: u64, lo_hi in (1usize..5, 1usize..5)) {
        let (a, b) = lo_hi;
        prop_assume!(a != b && a.max(b) <= gamma);
        let (tau_lo, tau_hi) = (a.min(b), a.max(b));
        let mut edges: Vec<(usize, usize)> = (1..=gamma).map(|j| (0, j)).collect();
        if clique {
            for x in 1..=gamma {
                for y in x + 1..=gamma {
                    edges.push((x, y));
                }
            }
        }
        edges.push((1, gamma + 1));
        let net = Network::from_edges(gamma + 2, &edges).unwrap();
        let spec = CouplingSpec { ego: 0, d, tau_hi, tau_lo };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let pair = sample_coupled_pair(&net, spec, p, &mut rng).unwrap();
            prop_assert!(pair.high.dominates(pair.low));
        }
        let exact = exact_coupling_law(&net, spec, p, CAP).unwrap();
        prop_assert!(exact.joint.iter().all(|(pair, _)| pair.high.dominates(pair.low)));
        let law = AssignmentLaw::bernoulli(net.n(), p);
        let ue = ExposureSpec::NeighborCount.for_unit(&net, 0);
        let (t_lo, t_hi) = spec.values();
        prop_assert!(exact.low.total_variation(&conditional_law(&law, &ue, &t_lo, "c").unwrap()) < TOL);
        prop_assert!(exact.high.total_variation(&conditional_law(&law, &ue, &t_hi, "c").unwrap()) < TOL);
    }

    #[test]
    fn decomposition_identity_for_dependent_laws((net, y, w, _) in scenario(5)) {
        let n = net.n();
        // full support keeps every event possible
        let weights: Vec<u8> = w.iter().map(|&x| x + 1).collect();
        let law = explicit(n, &weights).unwrap();
        let spec = neighbor_spec(&net, count(true, 1), count(true, 0), SubpopulationRule::AtLeastOneNeighbor);
        prop_assume!(spec.is_some());
        let spec = spec.unwrap();
        let contexts = ContextSet::single();
        let mech = Mechanism::new(vec![law]).unwrap();
        let p = Problem::new(&net, &contexts, &y, &mech, &spec).unwrap();
        let t = tau(&p).unwrap().tau;
        let dec = decompose(&p).unwrap();
        prop_assert!((t - dec.tau_star - dec.bias_rn).abs() < TOL, "{t} vs {} + {}", dec.tau_star, dec.bias_rn);
    }

    #[test]
    fn independent_treatment_has_no_selection_bias((net, y, _, p) in scenario(5), own: bool) {
        let spec = neighbor_spec(&net, count(own, 1), count(own, 0), SubpopulationRule::AtLeastOneNeighbor);
        prop_assume!(spec.is_some());
        let spec = spec.unwrap();
        let contexts = ContextSet::single();
        let mech = Mechanism::new(vec![AssignmentLaw::ProductBernoulli { p }]).unwrap();
        let pr = Problem::new(&net, &contexts, &y, &mech, &spec).unwrap();
        prop_assert!(decompose(&pr).unwrap().bias_rn.abs() < TOL);
        let v = check_sign_preservation(ComparisonKind::Partial, &pr).unwrap();
        prop_assert_ne!(v.verdict, SignOutcome::Violation);
    }

    #[test]
    fn iid_treatment_preserves_ordered_signs((net, y, _, p) in scenario(5), own: bool, unit in 0usize..5, hi: usize, lo: usize) {
        let gamma = net.degree(unit % net.n());
        prop_assume!(gamma >= 2);
        let tau_hi = 2 + hi % (gamma - 1);
        let tau_lo = 1 + lo % (tau_hi - 1);
        let spec = neighbor_spec(&net, count(own, tau_hi as u32), count(own, tau_lo as u32), SubpopulationRule::Degree(gamma))
            .unwrap();
        let contexts = ContextSet::single();
        let mech = Mechanism::new(vec![AssignmentLaw::bernoulli(net.n(), p[0])]).unwrap();
        let pr = Problem::new(&net, &contexts, &y, &mech, &spec).unwrap();
        let v = check_sign_preservation(ComparisonKind::Ordered, &pr).unwrap();
        prop_assert_ne!(v.verdict, SignOutcome::Violation, "{:?}", v);
    }

    #[test]
    fn comparison_sets_are_nested((net, y, w, _) in scenario(5), lo_hi in (0u32..3, 0u32..3)) {
        let (a, b) = lo_hi;
        prop_assume!(a != b);
        let n = net.n();
        let weights: Vec<u8> = w.iter().map(|&x| x + 1).collect();
        let law = explicit(n, &weights).unwrap();
        let spec = EstimandSpec::new(ExposureSpec::NeighborCount, count(true, a), count(true, b), UnitSet::full(n)).unwrap();
        let contexts = ContextSet::single();
        let mech = Mechanism::new(vec![law]).unwrap();
        let p = Problem::new(&net, &contexts, &y, &mech, &spec).unwrap();
        for i in 0..n {
            let pairs = |k| -> Vec<(u32, u32)> {
                comparison_set(k, &p, i).unwrap().entries.iter().map(|e| (e.d.bits(), e.d_prime.bits())).collect()
            };
            let general = pairs(ComparisonKind::General);
            let partial = pairs(ComparisonKind::Partial);
            let ordered = pairs(ComparisonKind::Ordered);
            prop_assert!(ordered.iter().all(|x| partial.contains(x)));
            prop_assert!(partial.iter().all(|x| general.contains(x)));
        }
    }
}

#[test]
fn zero_mass_event_names_the_unit() {
    let net = Network::path(3).unwrap();
    let law = AssignmentLaw::CompleteRandomization { n: 3, treated: 1 };
    let ue = ExposureSpec::NeighborCount.for_unit(&net, 1);
    let err = conditional_law(&law, &ue, &count(true, 2), "c").unwrap_err();
    assert!(matches!(err, Error::OverlapViolation { unit: 2, .. }), "{err:?}");
}
