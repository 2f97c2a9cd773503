//! Cache network graph, source placement, routing toward content sources
//! and the request-class set built on top of it.
//!
//! Costs are directional: `cost(i, j)` is what it takes to move a data
//! packet from `i` to `j`. Routing is symmetric, so a request travels
//! requester -> source and the data packet retraces the same path back.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type NodeId = usize;
pub type ContentId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph is disconnected: node {0} is unreachable from node 0")]
    Disconnected(NodeId),
    #[error("content {0} has no source node")]
    MissingSource(ContentId),
    #[error("edge {a}-{b} has non-positive cost")]
    NonPositiveCost { a: NodeId, b: NodeId },
    #[error("node {0} is out of range")]
    UnknownNode(NodeId),
    #[error("requester set is empty")]
    NoRequesters,
    #[error("cost choice list is empty")]
    EmptyChoices,
    #[error("requester {requester} is a source of content {content}")]
    RequesterIsSource { requester: NodeId, content: ContentId },
    #[error("no source of content {content} is reachable from node {from}")]
    Unreachable { from: NodeId, content: ContentId },
    #[error("negative request rate {rate} for requester {requester}, content {content}")]
    NegativeRate { requester: NodeId, content: ContentId, rate: f64 },
}

pub type Result<T> = std::result::Result<T, TopologyError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    /// Cost of moving a packet from `a` to `b`.
    pub cost_ab: f64,
    /// Cost of moving a packet from `b` to `a`.
    pub cost_ba: f64,
}

/// Rule that homes every content somewhere.
///
/// Explicit `source` lines always win; contents without one fall back to
/// the random rule if the file declared it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceMap {
    explicit: BTreeMap<ContentId, Vec<NodeId>>,
    random: Option<RandomSources>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSources {
    pub count: usize,
    pub seed: u64,
    pub pool: Vec<NodeId>,
}

impl SourceMap {
    pub fn from_explicit(explicit: BTreeMap<ContentId, Vec<NodeId>>) -> Self {
        let explicit = explicit
            .into_iter()
            .map(|(c, mut nodes)| {
                nodes.sort_unstable();
                nodes.dedup();
                (c, nodes)
            })
            .collect();
        SourceMap { explicit, random: None }
    }

    pub fn from_random(random: RandomSources) -> Self {
        SourceMap { explicit: BTreeMap::new(), random: Some(random) }
    }

    pub fn explicit(&self) -> &BTreeMap<ContentId, Vec<NodeId>> {
        &self.explicit
    }

    pub fn random(&self) -> Option<&RandomSources> {
        self.random.as_ref()
    }

    /// Sorted source set of `content`; empty when nothing homes it.
    pub fn sources_of(&self, content: ContentId) -> Vec<NodeId> {
        if let Some(s) = self.explicit.get(&content) {
            return s.clone();
        }
        match &self.random {
            Some(r) => {
                // Each content gets its own stream so the draw does not depend
                // on catalog size or on which contents were queried before.
                let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
                rng.set_stream(content as u64);
                let k = r.count.min(r.pool.len());
                let mut picked: Vec<NodeId> =
                    sample(&mut rng, r.pool.len(), k).into_iter().map(|i| r.pool[i]).collect();
                picked.sort_unstable();
                picked
            }
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RequesterSpec {
    /// Every node that is not a source of any content.
    AllNonSource,
    List(Vec<NodeId>),
}

/// Validated cache network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    node_count: usize,
    edges: Vec<Edge>,
    /// `adjacency[i]` holds `(neighbor, cost from neighbor to i, cost from i to neighbor)`,
    /// sorted by neighbor id.
    adjacency: Vec<Vec<(NodeId, f64, f64)>>,
    capacities: Vec<usize>,
    sources: SourceMap,
    requesters: RequesterSpec,
}

impl Network {
    /// Builds and validates a network. Source coverage of a particular
    /// catalog is checked separately by [`Network::check_catalog`].
    pub fn new(
        node_count: usize,
        edges: Vec<Edge>,
        capacities: Vec<usize>,
        sources: SourceMap,
        requesters: RequesterSpec,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        for e in &edges {
            for n in [e.a, e.b] {
                if n >= node_count {
                    return Err(TopologyError::UnknownNode(n));
                }
            }
            if !(e.cost_ab > 0.0 && e.cost_ba > 0.0) || !e.cost_ab.is_finite() || !e.cost_ba.is_finite() {
                return Err(TopologyError::NonPositiveCost { a: e.a, b: e.b });
            }
            adjacency[e.a].push((e.b, e.cost_ba, e.cost_ab));
            adjacency[e.b].push((e.a, e.cost_ab, e.cost_ba));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(n, _, _)| n);
        }
        if capacities.len() != node_count {
            return Err(TopologyError::UnknownNode(capacities.len()));
        }
        for nodes in sources.explicit.values() {
            if let Some(&n) = nodes.iter().find(|&&n| n >= node_count) {
                return Err(TopologyError::UnknownNode(n));
            }
        }
        if let Some(r) = &sources.random {
            if let Some(&n) = r.pool.iter().find(|&&n| n >= node_count) {
                return Err(TopologyError::UnknownNode(n));
            }
            if r.pool.is_empty() || r.count == 0 {
                return Err(TopologyError::MissingSource(0));
            }
        } else if sources.explicit.is_empty() {
            return Err(TopologyError::MissingSource(0));
        }
        if let RequesterSpec::List(list) = &requesters {
            if let Some(&n) = list.iter().find(|&&n| n >= node_count) {
                return Err(TopologyError::UnknownNode(n));
            }
            if list.is_empty() {
                return Err(TopologyError::NoRequesters);
            }
        }
        let net = Network { node_count, edges, adjacency, capacities, sources, requesters };
        net.check_connected()?;
        Ok(net)
    }

    fn check_connected(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(TopologyError::Parse { line: 0, msg: "network has no nodes".into() });
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _, _) in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(TopologyError::Disconnected(v)),
            None => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn capacity(&self, node: NodeId) -> usize {
        self.capacities[node]
    }

    pub fn with_capacities(mut self, capacities: Vec<usize>) -> Result<Self> {
        if capacities.len() != self.node_count {
            return Err(TopologyError::UnknownNode(capacities.len()));
        }
        self.capacities = capacities;
        Ok(self)
    }

    pub fn source_map(&self) -> &SourceMap {
        &self.sources
    }

    pub fn sources_of(&self, content: ContentId) -> Vec<NodeId> {
        self.sources.sources_of(content)
    }

    /// Neighbors of `node` as `(neighbor, cost neighbor->node, cost node->neighbor)`.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64, f64)] {
        &self.adjacency[node]
    }

    /// Cost of sending a packet from `from` to the adjacent node `to`.
    pub fn cost(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.adjacency[to]
            .binary_search_by_key(&from, |&(n, _, _)| n)
            .ok()
            .map(|i| self.adjacency[to][i].1)
    }

    /// Verifies every content of a catalog of `size` has a source and
    /// returns the set of nodes that source at least one of them.
    pub fn check_catalog(&self, size: usize) -> Result<BTreeSet<NodeId>> {
        let mut used = BTreeSet::new();
        if let Some(r) = &self.sources.random {
            let pool: BTreeSet<NodeId> = r.pool.iter().copied().collect();
            for c in 0..size {
                if !self.sources.explicit.contains_key(&c) {
                    used.extend(self.sources_of(c));
                    if pool.is_subset(&used) {
                        break;
                    }
                }
            }
        } else {
            for c in 0..size {
                if !self.sources.explicit.contains_key(&c) {
                    return Err(TopologyError::MissingSource(c));
                }
            }
        }
        for (&c, nodes) in &self.sources.explicit {
            if c < size {
                used.extend(nodes.iter().copied());
            }
        }
        Ok(used)
    }

    /// Requester set for a catalog of `size` contents.
    pub fn requesters(&self, catalog_size: usize) -> Result<Vec<NodeId>> {
        let list = match &self.requesters {
            RequesterSpec::List(l) => l.clone(),
            RequesterSpec::AllNonSource => {
                let used = self.check_catalog(catalog_size)?;
                (0..self.node_count).filter(|n| !used.contains(n)).collect()
            }
        };
        if list.is_empty() {
            return Err(TopologyError::NoRequesters);
        }
        Ok(list)
    }

    pub fn requester_spec(&self) -> &RequesterSpec {
        &self.requesters
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| TopologyError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| TopologyError::Parse { line, msg: format!("bad {what} `{tok}`") })
}

/// Parses the line-oriented topology format.
///
/// ```text
/// nodes 3
/// edge 0 1 10          # symmetric cost
/// edge 1 2 10 20       # cost 1->2 is 10, cost 2->1 is 20
/// cap 1 5
/// source 0 2
/// sources random 1 seed 7 among 2
/// requesters all
/// ```
pub fn load_network(text: &str) -> Result<Network> {
    let mut node_count: Option<usize> = None;
    let mut edges = Vec::new();
    let mut caps: Vec<(usize, NodeId, usize)> = Vec::new();
    let mut sources = SourceMap::default();
    let mut requesters = RequesterSpec::AllNonSource;
    let mut seen_edges = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tok = body.split_whitespace();
        let keyword = tok.next().unwrap_or_default();
        if keyword != "nodes" && node_count.is_none() {
            return Err(TopologyError::Parse { line, msg: "expected `nodes <n>` header first".into() });
        }
        match keyword {
            "nodes" => {
                if node_count.is_some() {
                    return Err(TopologyError::Parse { line, msg: "duplicate `nodes` header".into() });
                }
                node_count = Some(parse_num(tok.next(), line, "node count")?);
            }
            "edge" => {
                let a: NodeId = parse_num(tok.next(), line, "node id")?;
                let b: NodeId = parse_num(tok.next(), line, "node id")?;
                let cost_ab: f64 = parse_num(tok.next(), line, "cost")?;
                let cost_ba: f64 = match tok.next() {
                    Some(t) => parse_num(Some(t), line, "cost")?,
                    None => cost_ab,
                };
                if a == b {
                    return Err(TopologyError::Parse { line, msg: "self loop".into() });
                }
                if !seen_edges.insert((a.min(b), a.max(b))) {
                    return Err(TopologyError::Parse { line, msg: format!("duplicate edge {a}-{b}") });
                }
                if !(cost_ab > 0.0 && cost_ba > 0.0) {
                    return Err(TopologyError::NonPositiveCost { a, b });
                }
                edges.push(Edge { a, b, cost_ab, cost_ba });
            }
            "cap" => {
                let n: NodeId = parse_num(tok.next(), line, "node id")?;
                let b: usize = parse_num(tok.next(), line, "capacity")?;
                caps.push((line, n, b));
            }
            "source" => {
                let c: ContentId = parse_num(tok.next(), line, "content id")?;
                let n: NodeId = parse_num(tok.next(), line, "node id")?;
                let set = sources.explicit.entry(c).or_default();
                if !set.contains(&n) {
                    set.push(n);
                    set.sort_unstable();
                }
            }
            "sources" => {
                if tok.next() != Some("random") {
                    return Err(TopologyError::Parse { line, msg: "expected `sources random`".into() });
                }
                let count: usize = parse_num(tok.next(), line, "count per content")?;
                if tok.next() != Some("seed") {
                    return Err(TopologyError::Parse { line, msg: "expected `seed <s>`".into() });
                }
                let seed: u64 = parse_num(tok.next(), line, "seed")?;
                let pool = match tok.next() {
                    Some("among") => {
                        let mut pool = Vec::new();
                        for t in tok.by_ref() {
                            pool.push(parse_num(Some(t), line, "node id")?);
                        }
                        pool
                    }
                    Some(other) => {
                        return Err(TopologyError::Parse { line, msg: format!("unexpected `{other}`") })
                    }
                    None => (0..node_count.unwrap_or(0)).collect(),
                };
                if count == 0 || count > pool.len() {
                    return Err(TopologyError::Parse {
                        line,
                        msg: format!("cannot draw {count} sources from a pool of {}", pool.len()),
                    });
                }
                sources.random = Some(RandomSources { count, seed, pool });
            }
            "requesters" => match tok.next() {
                Some("all") => requesters = RequesterSpec::AllNonSource,
                Some("list") => {
                    let mut list = Vec::new();
                    for t in tok.by_ref() {
                        list.push(parse_num(Some(t), line, "node id")?);
                    }
                    requesters = RequesterSpec::List(list);
                }
                _ => return Err(TopologyError::Parse { line, msg: "expected `all` or `list`".into() }),
            },
            other => return Err(TopologyError::Parse { line, msg: format!("unknown directive `{other}`") }),
        }
        if keyword != "sources" && keyword != "requesters" {
            if let Some(extra) = tok.next() {
                return Err(TopologyError::Parse { line, msg: format!("trailing token `{extra}`") });
            }
        }
    }

    let n = node_count.ok_or(TopologyError::Parse { line: 0, msg: "missing `nodes` header".into() })?;
    let mut capacities = vec![0; n];
    for (line, node, b) in caps {
        if node >= n {
            return Err(TopologyError::Parse { line, msg: format!("node {node} out of range") });
        }
        capacities[node] = b;
    }
    Network::new(n, edges, capacities, sources, requesters)
}

/// Serializes a network back into the topology format. Random source rules
/// are written as directives, not expanded.
pub fn write_network(net: &Network) -> String {
    let mut out = format!("nodes {}\n", net.node_count);
    for e in &net.edges {
        if e.cost_ab == e.cost_ba {
            out.push_str(&format!("edge {} {} {}\n", e.a, e.b, e.cost_ab));
        } else {
            out.push_str(&format!("edge {} {} {} {}\n", e.a, e.b, e.cost_ab, e.cost_ba));
        }
    }
    for (i, &b) in net.capacities.iter().enumerate() {
        if b > 0 {
            out.push_str(&format!("cap {i} {b}\n"));
        }
    }
    for (c, nodes) in &net.sources.explicit {
        for n in nodes {
            out.push_str(&format!("source {c} {n}\n"));
        }
    }
    if let Some(r) = &net.sources.random {
        let pool: Vec<String> = r.pool.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("sources random {} seed {} among {}\n", r.count, r.seed, pool.join(" ")));
    }
    match &net.requesters {
        RequesterSpec::AllNonSource => out.push_str("requesters all\n"),
        RequesterSpec::List(l) => {
            let ids: Vec<String> = l.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("requesters list {}\n", ids.join(" ")));
        }
    }
    out
}

/// Replaces every edge cost with a uniform draw from `choices`, the same
/// value in both directions.
pub fn assign_random_costs(net: &Network, choices: &[f64], seed: u64) -> Result<Network> {
    if choices.is_empty() {
        return Err(TopologyError::EmptyChoices);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = net
        .edges
        .iter()
        .map(|e| {
            let cost = choices[rng.random_range(0..choices.len())];
            Edge { a: e.a, b: e.b, cost_ab: cost, cost_ba: cost }
        })
        .collect();
    Network::new(net.node_count, edges, net.capacities.clone(), net.sources.clone(), net.requesters.clone())
}

/// Ordered node sequence from requester (`nodes[0]`) to a source (last).
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub content: ContentId,
    pub nodes: Vec<NodeId>,
}

impl Path {
    /// Data-direction cost of hop `k`, i.e. from `nodes[k + 1]` to `nodes[k]`.
    pub fn hop_costs(&self, net: &Network) -> Vec<f64> {
        self.nodes
            .windows(2)
            .map(|w| net.cost(w[1], w[0]).expect("path hops are adjacent"))
            .collect()
    }

    pub fn cost(&self, net: &Network) -> f64 {
        self.hop_costs(net).iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestClass {
    pub content: ContentId,
    pub path: Path,
    /// Per-hop data-direction costs, `hop_costs[k]` = cost(p_{k+1} -> p_k).
    pub hop_costs: Vec<f64>,
    pub rate: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    node: NodeId,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree rooted at a source set. `next_hop[v]` is the neighbor
/// one step closer to the nearest source; `dist[v]` the data-direction cost.
#[derive(Debug, Clone)]
pub struct SourceTree {
    pub sources: Vec<NodeId>,
    pub dist: Vec<f64>,
    pub next_hop: Vec<Option<NodeId>>,
    /// `hop_cost[v]` = cost of the data hop `next_hop[v] -> v`.
    pub hop_cost: Vec<f64>,
}

impl SourceTree {
    pub fn build(net: &Network, sources: &[NodeId]) -> SourceTree {
        let n = net.node_count;
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Frontier { dist: 0.0, node: s });
        }
        while let Some(Frontier { dist: d, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            // data flows u -> v, so relax with cost(u -> v)
            for &(v, _, cost_uv) in &net.adjacency[u] {
                let nd = d + cost_uv;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Frontier { dist: nd, node: v });
                }
            }
        }
        // Smallest-id neighbor on some shortest path. Costs are positive so
        // the chosen hop strictly decreases distance and no cycle can form.
        let mut next_hop = vec![None; n];
        let mut hop_cost = vec![0.0; n];
        for v in 0..n {
            if dist[v] == 0.0 || !dist[v].is_finite() {
                continue;
            }
            let tol = 1e-12 * dist[v].abs();
            if let Some(&(u, cost_uv, _)) =
                net.adjacency[v].iter().find(|&&(u, cost_uv, _)| (dist[u] + cost_uv - dist[v]).abs() <= tol)
            {
                next_hop[v] = Some(u);
                hop_cost[v] = cost_uv;
            }
        }
        let mut sources = sources.to_vec();
        sources.sort_unstable();
        SourceTree { sources, dist, next_hop, hop_cost }
    }

    pub fn is_source(&self, node: NodeId) -> bool {
        self.sources.binary_search(&node).is_ok()
    }

    /// Appends the path from `from` to its nearest source to `buf`.
    pub fn walk_into(&self, from: NodeId, buf: &mut Vec<NodeId>) -> bool {
        buf.clear();
        let mut v = from;
        buf.push(v);
        while !self.is_source(v) {
            match self.next_hop[v] {
                Some(u) => {
                    v = u;
                    buf.push(v);
                }
                None => return false,
            }
        }
        true
    }
}

/// Minimum data-direction cost path from `requester` to the nearest source
/// of `content`.
pub fn route(net: &Network, requester: NodeId, content: ContentId) -> Result<Path> {
    if requester >= net.node_count {
        return Err(TopologyError::UnknownNode(requester));
    }
    let sources = net.sources_of(content);
    if sources.is_empty() {
        return Err(TopologyError::MissingSource(content));
    }
    if sources.contains(&requester) {
        return Err(TopologyError::RequesterIsSource { requester, content });
    }
    let tree = SourceTree::build(net, &sources);
    let mut nodes = Vec::new();
    if !tree.walk_into(requester, &mut nodes) {
        return Err(TopologyError::Unreachable { from: requester, content });
    }
    Ok(Path { content, nodes })
}

/// One class per `(requester, content)` entry with a positive rate, in
/// `(requester, content)` order.
pub fn build_request_classes(
    net: &Network,
    demand: &BTreeMap<(NodeId, ContentId), f64>,
) -> Result<Vec<RequestClass>> {
    let mut trees: BTreeMap<Vec<NodeId>, SourceTree> = BTreeMap::new();
    let mut classes = Vec::new();
    for (&(requester, content), &rate) in demand {
        if rate < 0.0 || rate.is_nan() {
            return Err(TopologyError::NegativeRate { requester, content, rate });
        }
        if rate == 0.0 {
            continue;
        }
        if requester >= net.node_count {
            return Err(TopologyError::UnknownNode(requester));
        }
        let sources = net.sources_of(content);
        if sources.is_empty() {
            return Err(TopologyError::MissingSource(content));
        }
        if sources.contains(&requester) {
            return Err(TopologyError::RequesterIsSource { requester, content });
        }
        let tree = trees.entry(sources.clone()).or_insert_with(|| SourceTree::build(net, &sources));
        let mut nodes = Vec::new();
        if !tree.walk_into(requester, &mut nodes) {
            return Err(TopologyError::Unreachable { from: requester, content });
        }
        let path = Path { content, nodes };
        let hop_costs = path.hop_costs(net);
        classes.push(RequestClass { content, path, hop_costs, rate });
    }
    Ok(classes)
}

/// Bundled GEANT-scale topology (51 nodes, 64 edges, unit costs).
pub fn geant() -> Network {
    load_network(include_str!("../data/geant.topo")).expect("bundled topology is valid")
}

/// Bundled single-cache topology: node 0 caches in front of origins at
/// costs 10, 100 and 1000.
pub fn single_cache() -> Network {
    load_network(include_str!("../data/single_cache.topo")).expect("bundled topology is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE3: &str = "nodes 3\nedge 0 1 1\nedge 1 2 1\ncap 0 1\ncap 1 1\nsource 0 2\n";

    #[test]
    fn minimal_path_instance() {
        let net = load_network(LINE3).unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edges().len(), 2);
        assert_eq!(net.capacities(), &[1, 1, 0]);
        assert_eq!(net.sources_of(0), vec![2]);
    }

    #[test]
    fn zero_cost_rejected() {
        let err = load_network("nodes 2\nedge 0 1 0\nsource 0 1\n").unwrap_err();
        assert_eq!(err, TopologyError::NonPositiveCost { a: 0, b: 1 });
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load_network("nodes 2\n# fine\nedge 0 x 1\n").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 3, .. }), "{err:?}");
        let err = load_network("edge 0 1 1\n").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 1, .. }));
    }

    #[test]
    fn disconnected_and_sourceless() {
        let err = load_network("nodes 3\nedge 0 1 1\nsource 0 1\n").unwrap_err();
        assert_eq!(err, TopologyError::Disconnected(2));
        let err = load_network("nodes 2\nedge 0 1 1\n").unwrap_err();
        assert!(matches!(err, TopologyError::MissingSource(_)));
    }

    #[test]
    fn asymmetric_costs_are_directional() {
        let net = load_network("nodes 2\nedge 0 1 3 7\nsource 0 1\n").unwrap();
        assert_eq!(net.cost(0, 1), Some(3.0));
        assert_eq!(net.cost(1, 0), Some(7.0));
    }

    #[test]
    fn route_on_line() {
        let net = load_network(LINE3).unwrap();
        assert_eq!(route(&net, 0, 0).unwrap().nodes, vec![0, 1, 2]);
        assert!(matches!(route(&net, 2, 0), Err(TopologyError::RequesterIsSource { .. })));
    }

    #[test]
    fn equal_cost_sources_pick_smaller_id() {
        // 0 sits between sources 1 and 2 at equal cost.
        let net = load_network("nodes 3\nedge 0 2 5\nedge 0 1 5\nsource 0 2\nsource 0 1\n").unwrap();
        assert_eq!(route(&net, 0, 0).unwrap().nodes, vec![0, 1]);
    }

    #[test]
    fn cheap_long_arm_beats_expensive_short_arm() {
        // diamond: 0-1-3 costs 10+10, 0-2-3 costs 100+... ; direct 0-3 costs 100
        let text = "nodes 4\nedge 0 1 10\nedge 1 3 10\nedge 0 3 100\nedge 0 2 60\nedge 2 3 60\nsource 0 3\n";
        let net = load_network(text).unwrap();
        let p = route(&net, 0, 0).unwrap();
        assert_eq!(p.nodes, vec![0, 1, 3]);
        assert_eq!(p.cost(&net), 20.0);
    }

    #[test]
    fn random_sources_respect_pool_and_are_stable() {
        let net = load_network("nodes 4\nedge 0 1 1\nedge 1 2 1\nedge 2 3 1\nsources random 2 seed 3 among 1 2 3\n")
            .unwrap();
        for c in 0..50 {
            let s = net.sources_of(c);
            assert_eq!(s.len(), 2);
            assert!(s.iter().all(|n| (1..=3).contains(n)));
            assert_eq!(s, net.sources_of(c));
        }
        assert_eq!(net.requesters(50).unwrap(), vec![0]);
    }

    #[test]
    fn singleton_choice_sets_all_costs() {
        let net = geant();
        let net = assign_random_costs(&net, &[5.0], 1).unwrap();
        assert!(net.edges().iter().all(|e| e.cost_ab == 5.0 && e.cost_ba == 5.0));
        assert_eq!(assign_random_costs(&net, &[], 1).unwrap_err(), TopologyError::EmptyChoices);
    }

    #[test]
    fn random_costs_are_reproducible() {
        let net = geant();
        let a = assign_random_costs(&net, &[10.0, 100.0, 1000.0], 9).unwrap();
        let b = assign_random_costs(&net, &[10.0, 100.0, 1000.0], 9).unwrap();
        assert_eq!(a, b);
        let c = assign_random_costs(&net, &[10.0, 100.0, 1000.0], 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn geant_shape() {
        let net = geant();
        assert_eq!(net.node_count(), 51);
        assert_eq!(net.edges().len(), 64);
        let max_deg = (0..51).map(|v| net.neighbors(v).len()).max().unwrap();
        assert_eq!(max_deg, 7);
    }

    #[test]
    fn zero_rate_classes_dropped() {
        let net = load_network(LINE3).unwrap();
        let mut demand = BTreeMap::new();
        demand.insert((0, 0), 2.0);
        demand.insert((1, 0), 0.0);
        let classes = build_request_classes(&net, &demand).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].rate, 2.0);
        assert_eq!(classes[0].hop_costs, vec![1.0, 1.0]);
    }

    #[test]
    fn round_trip_text() {
        let net = load_network(include_str!("../data/single_cache.topo")).unwrap();
        assert_eq!(load_network(&write_network(&net)).unwrap(), net);
    }
}
