//! Self-check suites behind `lcmsim validate`. Each suite draws its own
//! random instances and reports how many checks it ran and the worst
//! deviation it saw.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cache::Policy;
use crate::engine::Simulator;
use crate::objective::{
    analytic_utility, baseline_cost, brute_force_optimal, caching_gain, gain_breakdown, greedy_placement_naive,
    greedy_placement_with, link_cost, marginal_value, single_cache_optimal, Instance, Placement, TieBreak,
    DEFAULT_BRUTE_FORCE_LIMIT, TOLERANCE,
};
use crate::strategy::{Coin, Strategy};
use crate::topology::{
    build_request_classes, route, ContentId, Edge, Network, NodeId, RequesterSpec, SourceMap,
};
use crate::workload::Request;

/// Shape of the random toy instances.
#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub max_nodes: usize,
    pub max_contents: usize,
    pub max_capacity: usize,
    pub max_classes: usize,
    pub costs: Vec<f64>,
    /// Draw the two directions of an edge independently.
    pub asymmetric: bool,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            max_nodes: 5,
            max_contents: 4,
            max_capacity: 2,
            max_classes: 6,
            costs: vec![10.0, 100.0, 1000.0],
            asymmetric: true,
        }
    }
}

/// Connected random graph: a random tree plus a few chords.
pub fn random_network<R: Rng>(rng: &mut R, nodes: usize, params: &InstanceParams, catalog: usize) -> Network {
    let mut edges: Vec<Edge> = Vec::new();
    let cost = |rng: &mut R| *params.costs.choose(rng).expect("cost list is non-empty");
    for v in 1..nodes {
        let u = rng.random_range(0..v);
        let ab = cost(rng);
        let ba = if params.asymmetric { cost(rng) } else { ab };
        edges.push(Edge { a: u, b: v, cost_ab: ab, cost_ba: ba });
    }
    for _ in 0..nodes / 2 {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a == b || edges.iter().any(|e| (e.a, e.b) == (a.min(b), a.max(b)) || (e.b, e.a) == (a.min(b), a.max(b))) {
            continue;
        }
        let ab = cost(rng);
        let ba = if params.asymmetric { cost(rng) } else { ab };
        edges.push(Edge { a: a.min(b), b: a.max(b), cost_ab: ab, cost_ba: ba });
    }
    let capacities = (0..nodes).map(|_| rng.random_range(0..=params.max_capacity)).collect();
    let mut sources = BTreeMap::new();
    for c in 0..catalog {
        let mut set = vec![rng.random_range(0..nodes)];
        if nodes > 2 && rng.random_bool(0.2) {
            set.push(rng.random_range(0..nodes));
        }
        sources.insert(c, set);
    }
    Network::new(nodes, edges, capacities, SourceMap::from_explicit(sources), RequesterSpec::AllNonSource)
        .expect("random tree is connected with positive costs")
}

/// Random toy instance: network, request classes and catalog.
pub fn random_instance<R: Rng>(rng: &mut R, params: &InstanceParams) -> (Network, Instance) {
    let nodes = rng.random_range(2..=params.max_nodes.max(2));
    let catalog = rng.random_range(1..=params.max_contents.max(1));
    let net = random_network(rng, nodes, params, catalog);
    let mut pairs: Vec<(NodeId, ContentId)> = (0..nodes)
        .flat_map(|n| (0..catalog).map(move |c| (n, c)))
        .filter(|&(n, c)| !net.sources_of(c).contains(&n))
        .collect();
    let mut demand = BTreeMap::new();
    let count = rng.random_range(1..=params.max_classes.max(1));
    for _ in 0..count {
        if pairs.is_empty() {
            break;
        }
        let pair = pairs.swap_remove(rng.random_range(0..pairs.len()));
        demand.insert(pair, rng.random_range(1..=10) as f64 * 0.5);
    }
    let classes = build_request_classes(&net, &demand).expect("pairs exclude sources");
    let inst = Instance::new(&net, classes, catalog).expect("classes fit the catalog");
    (net, inst)
}

/// Random feasible placement.
pub fn random_placement<R: Rng>(rng: &mut R, inst: &Instance, density: f64) -> Placement {
    let mut x = inst.empty_placement();
    for node in 0..inst.node_count() {
        for c in 0..inst.catalog_size {
            if x.used(node) < inst.capacities[node] && !inst.sources[c].contains(&node) && rng.random_bool(density) {
                x.set(node, c, true);
            }
        }
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub suites: Vec<SuiteResult>,
    /// Largest `|m - lambda * w|` seen by the utility suite.
    pub max_utility_gap: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "[{}] {:<24} {:>6} checks  {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.checks, s.detail)?;
        }
        writeln!(f, "max |m - lambda*w| = {:e}", self.max_utility_gap)
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    pub tie_break: TieBreak,
    /// Multiplies every suite's sample count.
    pub scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { seed: 2024, tie_break: TieBreak::Lexicographic, scale: 1.0 }
    }
}

pub fn validate() -> ValidationReport {
    validate_with(&ValidateOptions::default())
}

pub fn validate_with(opts: &ValidateOptions) -> ValidationReport {
    let n = |base: usize| ((base as f64 * opts.scale).ceil() as usize).max(1);
    let (utility, gap) = utility_suite(opts.seed, n(500));
    let suites = vec![
        gain_identity_suite(opts.seed, n(200)),
        greedy_equivalence_suite(opts.seed, n(100), opts.tie_break),
        single_cache_suite(opts.seed, n(50)),
        utility,
        submodularity_suite(opts.seed, n(1000)),
        approximation_suite(opts.seed, n(200), opts.tie_break),
        determinism_suite(opts.seed, n(100), opts.tie_break),
        ulc_suite(opts.seed, n(20)),
        noneffective_suite(opts.seed, n(10_000)),
    ];
    ValidationReport { suites, max_utility_gap: gap }
}

fn suite(name: &'static str, checks: usize, failures: usize, detail: String) -> SuiteResult {
    let detail = match (failures, detail.is_empty()) {
        (0, _) => detail,
        (n, true) => format!("{n} failures"),
        (n, false) => format!("{n} failures; {detail}"),
    };
    SuiteResult { name, passed: failures == 0, checks, detail }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5EED_0000 + salt);
    rng
}

/// `G` summed directly equals `L0 - L`, and `L0 = L(empty)`.
pub fn gain_identity_suite(seed: u64, samples: usize) -> SuiteResult {
    let mut rng = rng_for(seed, 1);
    let params = InstanceParams::default();
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..samples {
        let (_, inst) = random_instance(&mut rng, &params);
        let x = random_placement(&mut rng, &inst, 0.5);
        let direct = caching_gain(&inst.classes, &x).expect("feasible");
        let split = gain_breakdown(&inst.classes, &x).expect("feasible");
        let empty = link_cost(&inst.classes, &inst.empty_placement()).expect("feasible");
        let gap = (direct - split.gain).abs().max((empty - baseline_cost(&inst.classes)).abs());
        worst = worst.max(gap);
        if gap > TOLERANCE || split.gain < -TOLERANCE || split.gain > split.baseline + TOLERANCE {
            failures += 1;
        }
    }
    suite("gain-identity", samples, failures, format!("max gap {worst:e}"))
}

/// Heap-based greedy matches the literal loop under the same tie-break.
pub fn greedy_equivalence_suite(seed: u64, samples: usize, tie: TieBreak) -> SuiteResult {
    let mut rng = rng_for(seed, 2);
    let params = InstanceParams::default();
    let mut failures = 0;
    for _ in 0..samples {
        let (_, inst) = random_instance(&mut rng, &params);
        if greedy_placement_with(&inst, tie) != greedy_placement_naive(&inst, tie) {
            failures += 1;
        }
    }
    suite("greedy-equivalence", samples, failures, String::new())
}

/// Top-B by utility matches exhaustive search on a single cache.
pub fn single_cache_suite(seed: u64, samples: usize) -> SuiteResult {
    let mut rng = rng_for(seed, 3);
    let mut failures = 0;
    for _ in 0..samples {
        let catalog = rng.random_range(1..=6);
        let capacity = rng.random_range(0..=catalog.min(3));
        let costs = [10.0, 100.0, 1000.0];
        // node 0 caches; nodes 1..=3 are origins at the three costs
        let edges = (1..=3).map(|o| Edge { a: 0, b: o, cost_ab: costs[o - 1], cost_ba: costs[o - 1] }).collect();
        let mut sources = BTreeMap::new();
        let mut miss_cost = Vec::new();
        let mut demand = BTreeMap::new();
        let mut rates = Vec::new();
        for c in 0..catalog {
            let origin = rng.random_range(1..=3);
            sources.insert(c, vec![origin]);
            miss_cost.push(costs[origin - 1]);
            let rate = rng.random_range(0..=8) as f64;
            rates.push(rate);
            demand.insert((0, c), rate);
        }
        let net = Network::new(
            4,
            edges,
            vec![capacity, 0, 0, 0],
            SourceMap::from_explicit(sources),
            RequesterSpec::List(vec![0]),
        )
        .expect("star is valid");
        let classes = build_request_classes(&net, &demand).expect("requester is not an origin");
        let inst = Instance::new(&net, classes, catalog).expect("fits");
        let best = brute_force_optimal(&inst, DEFAULT_BRUTE_FORCE_LIMIT).expect("tiny");
        let mut top = inst.empty_placement();
        for c in single_cache_optimal(&rates, &miss_cost, capacity) {
            top.set(0, c, true);
        }
        if (inst.gain(&best) - inst.gain(&top)).abs() > TOLERANCE {
            failures += 1;
        }
    }
    suite("single-cache-oracle", samples, failures, String::new())
}

/// Marginal value equals filtered rate times average upstream cost.
pub fn utility_suite(seed: u64, samples: usize) -> (SuiteResult, f64) {
    let mut rng = rng_for(seed, 4);
    let params = InstanceParams::default();
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..samples {
        let (_, inst) = random_instance(&mut rng, &params);
        let x = random_placement(&mut rng, &inst, 0.4);
        let node = rng.random_range(0..inst.node_count());
        let content = rng.random_range(0..inst.catalog_size);
        let m = marginal_value(&inst.classes, &x, content, node);
        let (rate, w) = analytic_utility(&inst.classes, &x, content, node);
        let gap = (m - rate * w).abs();
        worst = worst.max(gap);
        if gap > TOLERANCE {
            failures += 1;
        }
    }
    (suite("utility-decomposition", samples, failures, format!("max gap {worst:e}")), worst)
}

/// Nested placements `A <= B`: adding anything never lowers `G`, and a
/// pair outside `B` gains at least as much on `A` as on `B`.
pub fn submodularity_suite(seed: u64, samples: usize) -> SuiteResult {
    let mut rng = rng_for(seed, 5);
    let params = InstanceParams { max_capacity: 3, ..InstanceParams::default() };
    let mut failures = 0;
    let mut checked = 0;
    while checked < samples {
        let (_, inst) = random_instance(&mut rng, &params);
        // ignore capacity: submodularity is a property of the set function
        let mut big = inst.empty_placement();
        for node in 0..inst.node_count() {
            for c in 0..inst.catalog_size {
                if rng.random_bool(0.5) {
                    big.set(node, c, true);
                }
            }
        }
        let mut small = big.clone();
        for (node, c) in big.entries() {
            if rng.random_bool(0.5) {
                small.set(node, c, false);
            }
        }
        let outside: Vec<(NodeId, ContentId)> = (0..inst.node_count())
            .flat_map(|n| (0..inst.catalog_size).map(move |c| (n, c)))
            .filter(|&(n, c)| !big.get(n, c))
            .collect();
        let Some(&(node, c)) = outside.choose(&mut rng) else { continue };
        checked += 1;
        let m_small = marginal_value(&inst.classes, &small, c, node);
        let m_big = marginal_value(&inst.classes, &big, c, node);
        if m_small < m_big - TOLERANCE || m_big < -TOLERANCE || inst.gain(&big) < inst.gain(&small) - TOLERANCE {
            failures += 1;
        }
    }
    suite("monotone-submodular", checked, failures, String::new())
}

/// Greedy reaches at least half the exhaustive optimum.
pub fn approximation_suite(seed: u64, samples: usize, tie: TieBreak) -> SuiteResult {
    let mut rng = rng_for(seed, 6);
    let params = InstanceParams::default();
    let (mut failures, mut worst) = (0, f64::INFINITY);
    for _ in 0..samples {
        let (_, inst) = random_instance(&mut rng, &params);
        let opt = inst.gain(&brute_force_optimal(&inst, DEFAULT_BRUTE_FORCE_LIMIT).expect("tiny instance"));
        let greedy = inst.gain(&greedy_placement_with(&inst, tie));
        if opt > 0.0 {
            worst = worst.min(greedy / opt);
        }
        if greedy < 0.5 * opt - TOLERANCE || greedy > opt + TOLERANCE {
            failures += 1;
        }
    }
    suite("greedy-approximation", samples, failures, format!("worst ratio {worst:.4}"))
}

/// Greedy output is reproducible and follows the documented smallest
/// `(node, content)` tie-break.
pub fn determinism_suite(seed: u64, samples: usize, tie: TieBreak) -> SuiteResult {
    let mut failures = 0;
    // line 0 - 1 - 2, four equally popular contents homed at 2
    let mut sources = BTreeMap::new();
    let mut demand = BTreeMap::new();
    for c in 0..4 {
        sources.insert(c, vec![2]);
        demand.insert((0, c), 1.0);
    }
    let net = Network::new(
        3,
        vec![Edge { a: 0, b: 1, cost_ab: 1.0, cost_ba: 1.0 }, Edge { a: 1, b: 2, cost_ab: 1.0, cost_ba: 1.0 }],
        vec![1, 1, 0],
        SourceMap::from_explicit(sources),
        RequesterSpec::List(vec![0]),
    )
    .expect("line is valid");
    let inst = Instance::new(&net, build_request_classes(&net, &demand).expect("valid"), 4).expect("fits");
    if greedy_placement_with(&inst, tie).entries() != vec![(0, 0), (1, 1)] {
        failures += 1;
    }
    let mut rng = rng_for(seed, 7);
    let params = InstanceParams { costs: vec![10.0], asymmetric: false, ..InstanceParams::default() };
    for _ in 0..samples {
        let (_, inst) = random_instance(&mut rng, &params);
        let first = greedy_placement_with(&inst, tie);
        if first != greedy_placement_with(&inst, tie) || first != greedy_placement_naive(&inst, TieBreak::Lexicographic) {
            failures += 1;
        }
    }
    suite("greedy-determinism", samples + 1, failures, String::new())
}

/// Exact data-direction cost from `serving` down to every node below it.
fn exact_ulc(net: &Network, path: &[NodeId], serving: usize) -> Vec<(NodeId, f64)> {
    let mut out = Vec::new();
    for k in (0..serving).rev() {
        let sum: f64 = (k..serving).map(|j| net.cost(path[j + 1], path[j]).expect("adjacent")).sum();
        out.push((path[k], sum));
    }
    out
}

/// ULC seen at each node equals the exact hop-cost sum from the server.
pub fn ulc_suite(seed: u64, topologies: usize) -> SuiteResult {
    let mut rng = rng_for(seed, 8);
    let params = InstanceParams { costs: vec![1.0, 3.0, 10.0, 100.0, 1000.0], max_capacity: 2, ..InstanceParams::default() };
    let (mut failures, mut checks) = (0, 0);
    for t in 0..topologies {
        let catalog = 20;
        let nodes = rng.random_range(4..=12);
        let net = Arc::new(random_network(&mut rng, nodes, &params, catalog));
        let strategy = [Strategy::Lce(Policy::Lru), Strategy::UtilCache(Policy::Lfu), Strategy::Grd][t % 3];
        let mut sim = Simulator::new(Arc::clone(&net), catalog, strategy, 0.1, seed + t as u64).expect("valid");
        for seq in 0..500 {
            let requester = rng.random_range(0..nodes);
            let content = rng.random_range(0..catalog);
            if net.sources_of(content).contains(&requester) {
                continue;
            }
            let path = route(&net, requester, content).expect("connected").nodes;
            let mut seen = Vec::new();
            let req = Request { sequence: seq, timestamp: seq as f64, requester, content };
            let rec = sim.process_request_with(&req, None, |n, u| seen.push((n, u)));
            checks += 1;
            if seen != exact_ulc(&net, &path, rec.hit_depth) || rec.cost_paid != seen.last().map_or(0.0, |s| s.1) {
                failures += 1;
            }
        }
    }
    suite("ulc-exactness", checks, failures, String::new())
}

/// Forced noneffective requests leave every cache, metadata included,
/// untouched.
pub fn noneffective_suite(seed: u64, requests: usize) -> SuiteResult {
    let mut rng = rng_for(seed, 9);
    let params = InstanceParams { max_capacity: 3, ..InstanceParams::default() };
    let mut failures = 0;
    let per_policy = requests.div_ceil(2);
    for (i, policy) in [Policy::Lru, Policy::Lfu].into_iter().enumerate() {
        let catalog = 30;
        let net = Arc::new(random_network(&mut rng, 8, &params, catalog));
        let mut sim =
            Simulator::new(Arc::clone(&net), catalog, Strategy::UtilCache(policy), 0.1, seed + i as u64).expect("valid");
        let next = |rng: &mut ChaCha8Rng, seq: u64| loop {
            let requester = rng.random_range(0..8);
            let content = rng.random_range(0..catalog);
            if !net.sources_of(content).contains(&requester) {
                return Request { sequence: seq, timestamp: seq as f64, requester, content };
            }
        };
        for seq in 0..2_000 {
            let req = next(&mut rng, seq);
            sim.process_request_with(&req, Some(Coin::ForceEffective), |_, _| {});
        }
        for seq in 0..per_policy as u64 {
            let req = next(&mut rng, seq);
            let before: Vec<_> = sim.node_states().iter().map(|s| s.store.clone()).collect();
            sim.process_request_with(&req, Some(Coin::ForceNoneffective), |_, _| {});
            if sim.node_states().iter().zip(&before).any(|(s, b)| &s.store != b) {
                failures += 1;
            }
        }
    }
    suite("noneffective-invariance", per_policy * 2, failures, String::new())
}
