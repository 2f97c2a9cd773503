use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use utilcache::harness::validate::{random_instance, random_placement, InstanceParams};
use utilcache::objective::{
    analytic_utility, baseline_cost, brute_force_optimal, caching_gain, gain_breakdown, greedy_placement,
    greedy_placement_naive, link_cost, marginal_value, single_cache_optimal, Instance, Placement, TieBreak,
    DEFAULT_BRUTE_FORCE_LIMIT,
};
use utilcache::topology::{build_request_classes, load_network, RequestClass};

const TOL: f64 = 1e-9;

/// Link cost straight from the definition: each class pays every hop below
/// the first node on its path that caches the content.
fn oracle_cost(classes: &[RequestClass], x: &Placement) -> f64 {
    classes
        .iter()
        .map(|class| {
            let nodes = &class.path.nodes;
            let stop = (0..nodes.len() - 1).find(|&k| x.get(nodes[k], class.content)).unwrap_or(nodes.len() - 1);
            class.rate * class.hop_costs[..stop].iter().sum::<f64>()
        })
        .sum()
}

fn instance(seed: u64) -> (Instance, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, inst) = random_instance(&mut rng, &InstanceParams::default());
    (inst, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cost_and_gain_agree_with_first_hit_oracle(seed in any::<u64>()) {
        let (inst, mut rng) = instance(seed);
        let x = random_placement(&mut rng, &inst, 0.5);
        let cost = link_cost(&inst.classes, &x).unwrap();
        prop_assert!((cost - oracle_cost(&inst.classes, &x)).abs() <= TOL);
        let g = caching_gain(&inst.classes, &x).unwrap();
        let b = gain_breakdown(&inst.classes, &x).unwrap();
        prop_assert!((g - (baseline_cost(&inst.classes) - cost)).abs() <= TOL);
        prop_assert!((b.gain - g).abs() <= TOL);
        prop_assert!(g >= -TOL && g <= b.baseline + TOL);
    }

    #[test]
    fn marginal_value_is_utility(seed in any::<u64>()) {
        let (inst, mut rng) = instance(seed);
        let x = random_placement(&mut rng, &inst, 0.4);
        let node = rng.random_range(0..inst.node_count());
        let content = rng.random_range(0..inst.catalog_size);
        let m = marginal_value(&inst.classes, &x, content, node);
        let (rate, w) = analytic_utility(&inst.classes, &x, content, node);
        prop_assert!((m - rate * w).abs() <= TOL);
        prop_assert!(rate >= 0.0 && w >= 0.0);
    }

    #[test]
    fn diminishing_returns_on_nested_placements(seed in any::<u64>()) {
        let (inst, mut rng) = instance(seed);
        let big = random_placement(&mut rng, &inst, 0.6);
        let mut small = big.clone();
        for (n, c) in big.entries() {
            if rng.random_bool(0.5) {
                small.set(n, c, false);
            }
        }
        prop_assert!(small.is_subset_of(&big));
        let node = rng.random_range(0..inst.node_count());
        let content = rng.random_range(0..inst.catalog_size);
        prop_assume!(!big.get(node, content));
        let m_small = marginal_value(&inst.classes, &small, content, node);
        let m_big = marginal_value(&inst.classes, &big, content, node);
        prop_assert!(m_small >= m_big - TOL);
        prop_assert!(m_big >= -TOL);
        prop_assert!(inst.gain(&big) >= inst.gain(&small) - TOL);
    }

    #[test]
    fn greedy_is_feasible_full_and_half_optimal(seed in any::<u64>()) {
        let (inst, _) = instance(seed);
        let greedy = greedy_placement(&inst);
        prop_assert!(greedy.check_feasible().is_ok());
        prop_assert_eq!(&greedy, &greedy_placement_naive(&inst, TieBreak::Lexicographic));
        for node in 0..inst.node_count() {
            let candidates = (0..inst.catalog_size).filter(|&c| !inst.sources[c].contains(&node)).count();
            prop_assert_eq!(greedy.used(node), inst.capacities[node].min(candidates));
        }
        let opt = brute_force_optimal(&inst, DEFAULT_BRUTE_FORCE_LIMIT).unwrap();
        prop_assert!(inst.gain(&greedy) >= 0.5 * inst.gain(&opt) - TOL);
        prop_assert!(inst.gain(&greedy) <= inst.gain(&opt) + TOL);
    }
}

#[test]
fn line_instance_by_hand() {
    // R=0, I=1, S=2, unit costs, one content at rate 2
    let net = load_network("nodes 3\nedge 0 1 1\nedge 1 2 1\ncap 1 1\nsource 0 2\nrequesters list 0\n").unwrap();
    let classes = build_request_classes(&net, &BTreeMap::from([((0, 0), 2.0)])).unwrap();
    let inst = Instance::new(&net, classes, 1).unwrap();
    let x = inst.empty_placement().with(1, 0, true);
    assert_eq!(link_cost(&inst.classes, &inst.empty_placement()).unwrap(), 4.0);
    assert_eq!(caching_gain(&inst.classes, &x).unwrap(), 2.0);
    assert_eq!(analytic_utility(&inst.classes, &inst.empty_placement(), 0, 1), (2.0, 1.0));
    assert_eq!(greedy_placement(&inst), x);
}

#[test]
fn single_cache_oracle_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let n = rng.random_range(1..=7);
        let b = rng.random_range(0..=n);
        let rates: Vec<f64> = (0..n).map(|_| rng.random_range(0..20) as f64).collect();
        let costs: Vec<f64> = (0..n).map(|_| [10.0, 100.0, 1000.0][rng.random_range(0..3)]).collect();
        let chosen = single_cache_optimal(&rates, &costs, b);
        assert_eq!(chosen.len(), b);
        let value = |set: &[usize]| set.iter().map(|&c| rates[c] * costs[c]).sum::<f64>();
        let best = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == b)
            .map(|m| value(&(0..n).filter(|&c| m >> c & 1 == 1).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        assert!((value(&chosen) - best).abs() <= TOL);
    }
}
