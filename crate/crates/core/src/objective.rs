//! Offline link-cost objective over a fixed request-class set: total cost,
//! caching gain, marginal values, the utility decomposition of a marginal
//! into arrival rate times average upstream cost, the greedy placement and
//! exhaustive optima for toy instances.
//!
//! Along a class path `p_1 .. p_K` hop `k` carries data from `p_{k+1}` to
//! `p_k`; it is paid whenever none of `p_1 ..= p_k` caches the content.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use crate::topology::{ContentId, Network, NodeId, RequestClass};

pub const TOLERANCE: f64 = 1e-9;
pub const DEFAULT_BRUTE_FORCE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("placement exceeds capacity at node {node}: {used} > {capacity}")]
    Infeasible { node: NodeId, used: usize, capacity: usize },
    #[error("placement shape {nodes}x{contents} does not match the instance")]
    Shape { nodes: usize, contents: usize },
    #[error("instance needs {needed} placements, limit is {limit}")]
    TooLarge { needed: u64, limit: u64 },
    #[error("content {content} of a request class is outside the catalog of {catalog}")]
    ContentOutOfRange { content: ContentId, catalog: usize },
}

/// Binary cache-decision matrix, row-major by node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    capacities: Vec<usize>,
    catalog: usize,
    bits: Vec<bool>,
}

impl Placement {
    pub fn empty(capacities: Vec<usize>, catalog: usize) -> Self {
        let bits = vec![false; capacities.len() * catalog];
        Placement { capacities, catalog, bits }
    }

    pub fn node_count(&self) -> usize {
        self.capacities.len()
    }

    pub fn catalog_size(&self) -> usize {
        self.catalog
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn get(&self, node: NodeId, content: ContentId) -> bool {
        self.bits[node * self.catalog + content]
    }

    /// Unchecked write; feasibility is checked where it matters.
    pub fn set(&mut self, node: NodeId, content: ContentId, cached: bool) {
        self.bits[node * self.catalog + content] = cached;
    }

    pub fn with(&self, node: NodeId, content: ContentId, cached: bool) -> Placement {
        let mut p = self.clone();
        p.set(node, content, cached);
        p
    }

    pub fn used(&self, node: NodeId) -> usize {
        self.bits[node * self.catalog..(node + 1) * self.catalog].iter().filter(|&&b| b).count()
    }

    pub fn check_feasible(&self) -> Result<(), ObjectiveError> {
        for (node, &capacity) in self.capacities.iter().enumerate() {
            let used = self.used(node);
            if used > capacity {
                return Err(ObjectiveError::Infeasible { node, used, capacity });
            }
        }
        Ok(())
    }

    /// Cached `(node, content)` pairs in row-major order.
    pub fn entries(&self) -> Vec<(NodeId, ContentId)> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / self.catalog, i % self.catalog))
            .collect()
    }

    pub fn contents_at(&self, node: NodeId) -> Vec<ContentId> {
        (0..self.catalog).filter(|&c| self.get(node, c)).collect()
    }

    /// `true` when every entry of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Placement) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    fn lex_cmp(&self, other: &Placement) -> Ordering {
        self.bits.cmp(&other.bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBreakdown {
    /// Total link cost per unit time.
    pub cost: f64,
    /// Link cost with every cache empty.
    pub baseline: f64,
    /// `baseline - cost`.
    pub gain: f64,
}

fn check_shape(classes: &[RequestClass], x: &Placement) -> Result<(), ObjectiveError> {
    for class in classes {
        if class.content >= x.catalog {
            return Err(ObjectiveError::ContentOutOfRange { content: class.content, catalog: x.catalog });
        }
        if let Some(&n) = class.path.nodes.iter().find(|&&n| n >= x.node_count()) {
            return Err(ObjectiveError::Shape { nodes: n + 1, contents: x.catalog });
        }
    }
    Ok(())
}

fn cost_unchecked(classes: &[RequestClass], x: &Placement) -> f64 {
    classes
        .iter()
        .map(|class| {
            let mut total = 0.0;
            for (k, &w) in class.hop_costs.iter().enumerate() {
                if x.get(class.path.nodes[k], class.content) {
                    break;
                }
                total += w;
            }
            class.rate * total
        })
        .sum()
}

fn gain_unchecked(classes: &[RequestClass], x: &Placement) -> f64 {
    classes
        .iter()
        .map(|class| {
            let mut saved = 0.0;
            let mut hit = false;
            for (k, &w) in class.hop_costs.iter().enumerate() {
                hit = hit || x.get(class.path.nodes[k], class.content);
                if hit {
                    saved += w;
                }
            }
            class.rate * saved
        })
        .sum()
}

/// Total link cost `L(X)`.
pub fn link_cost(classes: &[RequestClass], x: &Placement) -> Result<f64, ObjectiveError> {
    x.check_feasible()?;
    check_shape(classes, x)?;
    Ok(cost_unchecked(classes, x))
}

/// Link cost with empty caches, `L0`.
pub fn baseline_cost(classes: &[RequestClass]) -> f64 {
    classes.iter().map(|c| c.rate * c.hop_costs.iter().sum::<f64>()).sum()
}

/// Caching gain `G(X)`, summed directly over the hops each class saves.
pub fn caching_gain(classes: &[RequestClass], x: &Placement) -> Result<f64, ObjectiveError> {
    x.check_feasible()?;
    check_shape(classes, x)?;
    Ok(gain_unchecked(classes, x))
}

/// `L`, `L0` and `G = L0 - L` (the subtraction route).
pub fn gain_breakdown(classes: &[RequestClass], x: &Placement) -> Result<GainBreakdown, ObjectiveError> {
    let cost = link_cost(classes, x)?;
    let baseline = baseline_cost(classes);
    Ok(GainBreakdown { cost, baseline, gain: baseline - cost })
}

/// `G(X | x_i^c = 1) - G(X | x_i^c = 0)`. Capacity is not checked since the
/// modified placement may legitimately overflow node `i`.
pub fn marginal_value(classes: &[RequestClass], x: &Placement, content: ContentId, node: NodeId) -> f64 {
    gain_unchecked(classes, &x.with(node, content, true)) - gain_unchecked(classes, &x.with(node, content, false))
}

/// Arrival rate of `content` at `node` once downstream caches have filtered
/// it, and the rate-weighted mean upstream cost those requests would incur
/// if `node` did not cache. Returns `(0, 0)` when no request reaches `node`.
pub fn analytic_utility(classes: &[RequestClass], x: &Placement, content: ContentId, node: NodeId) -> (f64, f64) {
    let mut rate = 0.0;
    let mut weighted = 0.0;
    for class in classes.iter().filter(|c| c.content == content) {
        if let Some((r, w)) = class_utility(class, x, node) {
            rate += r;
            weighted += r * w;
        }
    }
    if rate > 0.0 {
        (rate, weighted / rate)
    } else {
        (0.0, 0.0)
    }
}

/// Filtered rate and residual upstream cost of one class at `node`.
fn class_utility(class: &RequestClass, x: &Placement, node: NodeId) -> Option<(f64, f64)> {
    let nodes = &class.path.nodes;
    let pos = nodes.iter().position(|&n| n == node)?;
    if pos + 1 >= nodes.len() {
        return None;
    }
    if nodes[..pos].iter().any(|&n| x.get(n, class.content)) {
        return Some((0.0, 0.0));
    }
    let mut upstream = class.hop_costs[pos];
    for k in pos + 1..class.hop_costs.len() {
        if x.get(nodes[k], class.content) {
            break;
        }
        upstream += class.hop_costs[k];
    }
    Some((class.rate, upstream))
}

/// Request classes plus everything the placement algorithms need to know
/// about the network.
#[derive(Debug, Clone)]
pub struct Instance {
    pub capacities: Vec<usize>,
    pub catalog_size: usize,
    pub classes: Vec<RequestClass>,
    /// Source set per content; a node never caches content it sources.
    pub sources: Vec<Vec<NodeId>>,
}

impl Instance {
    pub fn new(net: &Network, classes: Vec<RequestClass>, catalog_size: usize) -> Result<Self, ObjectiveError> {
        let sources = (0..catalog_size).map(|c| net.sources_of(c)).collect();
        let inst = Instance { capacities: net.capacities().to_vec(), catalog_size, classes, sources };
        check_shape(&inst.classes, &inst.empty_placement())?;
        Ok(inst)
    }

    pub fn empty_placement(&self) -> Placement {
        Placement::empty(self.capacities.clone(), self.catalog_size)
    }

    pub fn node_count(&self) -> usize {
        self.capacities.len()
    }

    fn candidate(&self, node: NodeId, content: ContentId) -> bool {
        self.capacities[node] > 0 && !self.sources[content].contains(&node)
    }

    pub fn gain(&self, x: &Placement) -> f64 {
        gain_unchecked(&self.classes, x)
    }
}

/// Order among equal marginal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smaller node id first, then smaller content id.
    #[default]
    Lexicographic,
    /// Larger ids first. Only useful for checking tie sensitivity.
    ReverseLexicographic,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    marginal: f64,
    node: NodeId,
    content: ContentId,
    version: u64,
    tie: TieBreak,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        let ids = (other.node, other.content).cmp(&(self.node, self.content));
        let ids = match self.tie {
            TieBreak::Lexicographic => ids,
            TieBreak::ReverseLexicographic => ids.reverse(),
        };
        self.marginal.total_cmp(&other.marginal).then(ids)
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy placement: repeatedly cache the feasible pair with the largest
/// marginal value until no node has spare capacity.
pub fn greedy_placement(inst: &Instance) -> Placement {
    greedy_placement_with(inst, TieBreak::Lexicographic)
}

/// Greedy placement with an explicit tie-break.
///
/// Caching `c` somewhere only changes marginals of content `c`, so the
/// candidates of that content are recomputed and everything else stays in
/// the heap.
pub fn greedy_placement_with(inst: &Instance, tie: TieBreak) -> Placement {
    let mut x = inst.empty_placement();
    let mut by_content: BTreeMap<ContentId, Vec<&RequestClass>> = BTreeMap::new();
    for class in &inst.classes {
        by_content.entry(class.content).or_default().push(class);
    }
    let mut spare: Vec<usize> = inst.capacities.clone();
    let mut version = vec![0u64; inst.catalog_size];
    let mut heap = BinaryHeap::new();

    let push_content = |heap: &mut BinaryHeap<Candidate>, x: &Placement, content: ContentId, version: u64| {
        let mut marginals = vec![0.0; inst.node_count()];
        if let Some(classes) = by_content.get(&content) {
            for class in classes {
                for &node in &class.path.nodes {
                    if let Some((r, w)) = class_utility(class, x, node) {
                        marginals[node] += r * w;
                    }
                }
            }
        }
        for (node, &marginal) in marginals.iter().enumerate() {
            if inst.candidate(node, content) && !x.get(node, content) {
                heap.push(Candidate { marginal, node, content, version, tie });
            }
        }
    };

    for content in 0..inst.catalog_size {
        push_content(&mut heap, &x, content, 0);
    }
    while let Some(top) = heap.pop() {
        if top.version != version[top.content] || spare[top.node] == 0 || x.get(top.node, top.content) {
            continue;
        }
        x.set(top.node, top.content, true);
        spare[top.node] -= 1;
        version[top.content] += 1;
        push_content(&mut heap, &x, top.content, version[top.content]);
    }
    x
}

/// The greedy loop evaluated literally, every candidate scored through
/// [`marginal_value`] on every step. Quadratic; for cross-checks only.
pub fn greedy_placement_naive(inst: &Instance, tie: TieBreak) -> Placement {
    let mut x = inst.empty_placement();
    loop {
        let mut best: Option<Candidate> = None;
        for node in 0..inst.node_count() {
            if x.used(node) >= inst.capacities[node] {
                continue;
            }
            for content in 0..inst.catalog_size {
                if !inst.candidate(node, content) || x.get(node, content) {
                    continue;
                }
                let marginal = marginal_value(&inst.classes, &x, content, node);
                let cand = Candidate { marginal, node, content, version: 0, tie };
                if best.is_none_or(|b| cand > b) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some(b) => x.set(b.node, b.content, true),
            None => return x,
        }
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(u64::MAX as u128) as u64
}

/// Number of feasible placements [`brute_force_optimal`] would enumerate.
pub fn placement_count(inst: &Instance) -> u64 {
    let mut total: u64 = 1;
    for node in 0..inst.node_count() {
        let n = (0..inst.catalog_size).filter(|&c| inst.candidate(node, c)).count();
        let per: u64 = (0..=inst.capacities[node].min(n)).map(|k| binomial(n, k)).fold(0, u64::saturating_add);
        total = total.saturating_mul(per.max(1));
    }
    total
}

/// Exhaustive optimum over every feasible placement. Ties go to the
/// lexicographically smallest matrix.
pub fn brute_force_optimal(inst: &Instance, limit: u64) -> Result<Placement, ObjectiveError> {
    let needed = placement_count(inst);
    if needed > limit {
        return Err(ObjectiveError::TooLarge { needed, limit });
    }
    let options: Vec<Vec<Vec<ContentId>>> = (0..inst.node_count())
        .map(|node| {
            let cands: Vec<ContentId> = (0..inst.catalog_size).filter(|&c| inst.candidate(node, c)).collect();
            subsets_up_to(&cands, inst.capacities[node])
        })
        .collect();

    let mut x = inst.empty_placement();
    let mut best = (inst.gain(&x), x.clone());
    let mut choice = vec![0usize; options.len()];
    loop {
        for (node, subsets) in options.iter().enumerate() {
            for &c in &subsets[choice[node]] {
                x.set(node, c, true);
            }
        }
        let g = inst.gain(&x);
        if g > best.0 + TOLERANCE || ((g - best.0).abs() <= TOLERANCE && x.lex_cmp(&best.1) == Ordering::Less) {
            best = (g, x.clone());
        }
        for (node, subsets) in options.iter().enumerate() {
            for &c in &subsets[choice[node]] {
                x.set(node, c, false);
            }
        }
        // odometer over per-node subset choices
        let mut carry = true;
        for (node, subsets) in options.iter().enumerate() {
            if !carry {
                break;
            }
            choice[node] += 1;
            if choice[node] == subsets.len() {
                choice[node] = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }
    Ok(best.1)
}

fn subsets_up_to(items: &[ContentId], max: usize) -> Vec<Vec<ContentId>> {
    let mut out = vec![Vec::new()];
    for &item in items {
        let grown: Vec<Vec<ContentId>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut s = s.clone();
                s.push(item);
                s
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Top-`capacity` contents by `rate * cost`, ties to the smaller id,
/// returned in ascending id order.
pub fn single_cache_optimal(rates: &[f64], costs: &[f64], capacity: usize) -> Vec<ContentId> {
    let mut ids: Vec<ContentId> = (0..rates.len().min(costs.len())).collect();
    ids.sort_by(|&a, &b| (rates[b] * costs[b]).total_cmp(&(rates[a] * costs[a])).then(a.cmp(&b)));
    ids.truncate(capacity);
    ids.sort_unstable();
    ids
}
