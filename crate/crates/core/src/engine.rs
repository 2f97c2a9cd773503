//! Flow-level simulation. Responses are instantaneous and requests are never
//! aggregated, so every request is one atomic walk: up the path until the
//! first node that holds the content, then back down with the data packet.
//! Only data hops are charged.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::objective::Placement;
use crate::rng::{substream, Stream};
use crate::strategy::{Coin, Mark, NodeState, Strategy, StrategyError, UlcField};
use crate::topology::{ContentId, Network, NodeId, SourceTree, TopologyError};
use crate::workload::{generate, Request, WorkloadError, ZipfCatalog};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("measure_count must be at least 1")]
    NothingToMeasure,
    #[error("preloaded placement does not fit the network: {0}")]
    Preload(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub network: Arc<Network>,
    pub catalog: Arc<ZipfCatalog>,
    pub strategy: Strategy,
    pub ewma_alpha: f64,
    /// Total request rate per second.
    pub rate: f64,
    pub warmup: u64,
    pub measure: u64,
    pub seed: u64,
    /// Initial cache contents; required for [`Strategy::Static`].
    pub preload: Option<Placement>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub link_cost_paid: f64,
    pub no_cache_cost: f64,
    pub caching_gain: f64,
    pub server_hits: u64,
    pub requests_measured: u64,
    pub per_node_hits: Vec<u64>,
    pub wall_time: f64,
}

impl SimReport {
    /// Report with `wall_time` zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> SimReport {
        SimReport { wall_time: 0.0, ..self.clone() }
    }
}

/// Outcome of one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestRecord {
    pub serving_node: NodeId,
    /// Index of the serving node on the path; 0 means the requester itself.
    pub hit_depth: usize,
    pub served_by_source: bool,
    pub cost_paid: f64,
    /// Cost the request would have paid with every cache empty.
    pub full_cost: f64,
}

/// Routing state shared by all requests of a run: one shortest-path tree
/// per distinct source set.
#[derive(Debug, Clone)]
pub struct RouteTable {
    trees: Vec<SourceTree>,
    tree_of: Vec<u32>,
}

impl RouteTable {
    pub fn build(net: &Network, catalog_size: usize) -> Result<Self, TopologyError> {
        let mut index: BTreeMap<Vec<NodeId>, u32> = BTreeMap::new();
        let mut trees = Vec::new();
        let mut tree_of = Vec::with_capacity(catalog_size);
        for c in 0..catalog_size {
            let sources = net.sources_of(c);
            if sources.is_empty() {
                return Err(TopologyError::MissingSource(c));
            }
            let id = *index.entry(sources).or_insert_with_key(|s| {
                trees.push(SourceTree::build(net, s));
                (trees.len() - 1) as u32
            });
            tree_of.push(id);
        }
        Ok(RouteTable { trees, tree_of })
    }

    pub fn tree(&self, content: ContentId) -> &SourceTree {
        &self.trees[self.tree_of[content] as usize]
    }
}

/// One simulation run's mutable state.
pub struct Simulator {
    net: Arc<Network>,
    strategy: Strategy,
    nodes: Vec<NodeState>,
    routes: RouteTable,
    coins: ChaCha8Rng,
    path: Vec<NodeId>,
    marks: Vec<Mark>,
}

impl Simulator {
    pub fn new(
        net: Arc<Network>,
        catalog_size: usize,
        strategy: Strategy,
        ewma_alpha: f64,
        seed: u64,
    ) -> Result<Self, EngineError> {
        let routes = RouteTable::build(&net, catalog_size)?;
        let nodes = (0..net.node_count())
            .map(|i| NodeState::new(strategy, net.capacity(i), catalog_size, ewma_alpha))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Simulator {
            net,
            strategy,
            nodes,
            routes,
            coins: substream(seed, Stream::StrategyCoins),
            path: Vec::new(),
            marks: Vec::new(),
        })
    }

    /// Fills caches from a placement, ignoring replacement order.
    pub fn preload(&mut self, x: &Placement) -> Result<(), EngineError> {
        if x.node_count() != self.nodes.len() {
            return Err(EngineError::Preload(format!("{} nodes vs {}", x.node_count(), self.nodes.len())));
        }
        for (node, content) in x.entries() {
            if self.routes.tree(content).is_source(node) {
                continue;
            }
            match &mut self.nodes[node].store {
                crate::strategy::Store::Policy(cache) => {
                    if cache.len() >= cache.capacity() {
                        return Err(EngineError::Preload(format!("node {node} over capacity")));
                    }
                    cache.insert(content).map_err(|e| EngineError::Preload(e.to_string()))?;
                }
                crate::strategy::Store::Grd(g) => g.force_cache(content),
            }
        }
        Ok(())
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn node_states(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn snapshot_caches(&self) -> Vec<BTreeSet<ContentId>> {
        self.nodes.iter().map(NodeState::contents).collect()
    }

    pub fn process_request(&mut self, req: &Request) -> RequestRecord {
        self.process_request_with(req, None, |_, _| {})
    }

    /// Processes one request. `coin` overrides the effective-request draw at
    /// every node; `on_hop(node, ulc)` sees the ULC value as the data packet
    /// arrives at each node below the serving node.
    pub fn process_request_with(
        &mut self,
        req: &Request,
        coin: Option<Coin>,
        mut on_hop: impl FnMut(NodeId, f64),
    ) -> RequestRecord {
        let content = req.content;
        let tree = self.routes.tree(content);
        if tree.is_source(req.requester) {
            return RequestRecord {
                serving_node: req.requester,
                hit_depth: 0,
                served_by_source: true,
                cost_paid: 0.0,
                full_cost: 0.0,
            };
        }
        let found = tree.walk_into(req.requester, &mut self.path);
        debug_assert!(found, "connected network always reaches a source");
        let last = self.path.len() - 1;

        self.marks.clear();
        let mut serving = last;
        let flips = matches!(self.strategy, Strategy::UtilCache(_));
        for k in 0..last {
            let node = self.path[k];
            let c = match coin {
                Some(c) => c,
                None if flips => Coin::Flip(self.coins.random::<f64>()),
                None => Coin::Flip(0.0),
            };
            let decision = self.nodes[node].on_request(self.strategy, content, c);
            self.marks.push(decision.mark);
            if decision.hit {
                serving = k;
                break;
            }
        }

        let mut ulc = UlcField::new();
        for k in (0..serving).rev() {
            let node = self.path[k];
            ulc.traverse(tree.hop_cost[node]);
            on_hop(node, ulc.value);
            self.nodes[node].on_data(self.strategy, content, ulc, self.marks[k]);
        }
        let mut full_cost = ulc.value;
        for &node in &self.path[serving..last] {
            full_cost += tree.hop_cost[node];
        }
        RequestRecord {
            serving_node: self.path[serving],
            hit_depth: serving,
            served_by_source: serving == last,
            cost_paid: ulc.value,
            full_cost,
        }
    }
}

/// Runs warmup plus measurement and reports on the measured suffix.
pub fn run(config: &SimConfig) -> Result<SimReport, EngineError> {
    let started = Instant::now();
    if config.measure == 0 {
        return Err(EngineError::NothingToMeasure);
    }
    let catalog_size = config.catalog.size();
    let requesters = config.network.requesters(catalog_size)?;
    let mut sim =
        Simulator::new(Arc::clone(&config.network), catalog_size, config.strategy, config.ewma_alpha, config.seed)?;
    if let Some(x) = &config.preload {
        sim.preload(x)?;
    }
    let stream = generate(&config.catalog, &requesters, config.rate, config.warmup + config.measure, config.seed)?;

    let mut report = SimReport {
        link_cost_paid: 0.0,
        no_cache_cost: 0.0,
        caching_gain: 0.0,
        server_hits: 0,
        requests_measured: 0,
        per_node_hits: vec![0; config.network.node_count()],
        wall_time: 0.0,
    };
    for req in stream {
        let rec = sim.process_request(&req);
        if req.sequence < config.warmup {
            continue;
        }
        report.requests_measured += 1;
        report.link_cost_paid += rec.cost_paid;
        report.no_cache_cost += rec.full_cost;
        if rec.served_by_source {
            report.server_hits += 1;
        } else {
            report.per_node_hits[rec.serving_node] += 1;
        }
    }
    report.caching_gain = report.no_cache_cost - report.link_cost_paid;
    report.wall_time = started.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::Policy;
    use crate::topology::load_network;

    fn line(caps: &str) -> Arc<Network> {
        Arc::new(load_network(&format!("nodes 3\nedge 0 1 1\nedge 1 2 1\n{caps}source 0 2\nrequesters list 0\n")).unwrap())
    }

    fn req(content: ContentId) -> Request {
        Request { sequence: 0, timestamp: 0.0, requester: 0, content }
    }

    #[test]
    fn miss_everywhere_then_hit_at_requester() {
        let mut sim = Simulator::new(line("cap 0 1\ncap 1 1\n"), 1, Strategy::Lce(Policy::Lru), 0.1, 1).unwrap();
        let mut hops = Vec::new();
        let rec = sim.process_request_with(&req(0), None, |n, u| hops.push((n, u)));
        assert_eq!(rec.cost_paid, 2.0);
        assert!(rec.served_by_source);
        assert_eq!(hops, vec![(1, 1.0), (0, 2.0)]);
        // LCE left copies at node 1 and the requester
        assert_eq!(sim.snapshot_caches(), vec![BTreeSet::from([0]), BTreeSet::from([0]), BTreeSet::new()]);
        let mut hops = Vec::new();
        let rec = sim.process_request_with(&req(0), None, |n, u| hops.push((n, u)));
        assert_eq!((rec.cost_paid, rec.hit_depth, rec.full_cost), (0.0, 0, 2.0));
        assert!(hops.is_empty());
    }

    #[test]
    fn intermediate_hit_saves_upstream_hop() {
        let net = line("cap 1 1\n");
        let mut x = Placement::empty(net.capacities().to_vec(), 1);
        x.set(1, 0, true);
        let mut sim = Simulator::new(net, 1, Strategy::Static, 0.1, 1).unwrap();
        sim.preload(&x).unwrap();
        let rec = sim.process_request(&req(0));
        assert_eq!((rec.serving_node, rec.cost_paid, rec.full_cost), (1, 1.0, 2.0));
    }

    #[test]
    fn zero_measure_rejected() {
        let net = line("");
        let config = SimConfig {
            network: net,
            catalog: Arc::new(ZipfCatalog::new(1, 1.0).unwrap()),
            strategy: Strategy::Lce(Policy::Lru),
            ewma_alpha: 0.1,
            rate: 1.0,
            warmup: 0,
            measure: 0,
            seed: 0,
            preload: None,
        };
        assert!(matches!(run(&config), Err(EngineError::NothingToMeasure)));
    }
}
