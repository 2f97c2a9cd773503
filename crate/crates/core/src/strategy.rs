//! Placement strategies run at every node: LCE, UtilCache and GRD, plus a
//! static mode that serves a precomputed placement.
//!
//! A request walks up its path calling [`NodeState::on_request`] at every
//! node until something serves it; the data packet then walks back down
//! calling [`NodeState::on_data`] with the accumulated upstream cost.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cache::{CacheState, Policy};
use crate::topology::ContentId;

pub const DEFAULT_EWMA_ALPHA: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("negative upstream link cost {0}")]
    NegativeUlc(f64),
    #[error("smoothing factor must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("unknown strategy `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Leave a copy everywhere on the response path.
    Lce(Policy),
    /// Effective-request filtering on top of a replacement policy.
    UtilCache(Policy),
    /// Keep the contents with the largest EWMA upstream-cost scores.
    Grd,
    /// Caches are preloaded and never change.
    Static,
}

impl Strategy {
    pub fn kind_name(self) -> &'static str {
        match self {
            Strategy::Lce(_) => "lce",
            Strategy::UtilCache(_) => "utilcache",
            Strategy::Grd => "grd",
            Strategy::Static => "static",
        }
    }

    pub fn policy(self) -> Option<Policy> {
        match self {
            Strategy::Lce(p) | Strategy::UtilCache(p) => Some(p),
            Strategy::Grd | Strategy::Static => None,
        }
    }

    pub fn policy_name(self) -> &'static str {
        self.policy().map_or("none", Policy::name)
    }

    /// Builds a strategy from the `strategy` / `policy` config pair.
    pub fn from_parts(kind: &str, policy: Option<&str>) -> Result<Self, StrategyError> {
        let policy = match policy.map(str::trim) {
            None | Some("lru") => Policy::Lru,
            Some("lfu") => Policy::Lfu,
            Some("none") if matches!(kind, "grd" | "static") => Policy::Lru,
            Some(other) => return Err(StrategyError::Unknown(other.to_string())),
        };
        match kind.trim() {
            "lce" => Ok(Strategy::Lce(policy)),
            "utilcache" | "u" => Ok(Strategy::UtilCache(policy)),
            "grd" => Ok(Strategy::Grd),
            "static" => Ok(Strategy::Static),
            other => Err(StrategyError::Unknown(other.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Lce(p) => write!(f, "lce-{}", p.name()),
            Strategy::UtilCache(p) => write!(f, "u-{}", p.name()),
            Strategy::Grd => f.write_str("grd"),
            Strategy::Static => f.write_str("static"),
        }
    }
}

/// Accepts `lce-lru`, `u-lfu`, `utilcache-lru`, `grd`, `static`.
impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.rsplit_once('-') {
            Some((kind, policy)) => Strategy::from_parts(kind, Some(policy)),
            None => Strategy::from_parts(&s, None),
        }
        .map_err(|_| StrategyError::Unknown(s.clone()))
    }
}

/// Per-node EWMA estimates of the upstream link cost a miss incurs.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilEstimator {
    estimates: HashMap<ContentId, f64>,
    w_max: f64,
    alpha: f64,
}

impl UtilEstimator {
    pub fn new(alpha: f64) -> Result<Self, StrategyError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(StrategyError::BadAlpha(alpha));
        }
        Ok(UtilEstimator { estimates: HashMap::new(), w_max: 0.0, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn estimate(&self, content: ContentId) -> Option<f64> {
        self.estimates.get(&content).copied()
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    /// Probability that a request for `content` is effective. Unseen
    /// contents, and nodes whose estimates are all zero, give 1.
    pub fn effective_probability(&self, content: ContentId) -> f64 {
        match self.estimates.get(&content) {
            Some(&w) if self.w_max > 0.0 => w / self.w_max,
            _ => 1.0,
        }
    }

    /// `coin` is uniform in `[0, 1)`.
    pub fn effective(&self, content: ContentId, coin: f64) -> bool {
        match self.estimates.get(&content) {
            None => true,
            Some(_) if self.w_max <= 0.0 => true,
            Some(&w) => coin < w / self.w_max,
        }
    }

    /// Folds one sniffed ULC into the estimate. The first observation
    /// initializes the estimate directly.
    pub fn update_estimate(&mut self, content: ContentId, observed_ulc: f64) -> Result<f64, StrategyError> {
        if !(observed_ulc >= 0.0) {
            return Err(StrategyError::NegativeUlc(observed_ulc));
        }
        let alpha = self.alpha;
        let w = self
            .estimates
            .entry(content)
            .and_modify(|w| *w = alpha * observed_ulc + (1.0 - alpha) * *w)
            .or_insert(observed_ulc);
        let w = *w;
        if w > self.w_max {
            self.w_max = w;
        }
        Ok(w)
    }
}

/// Upstream link cost carried by a data packet.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UlcField {
    pub value: f64,
}

impl UlcField {
    pub fn new() -> Self {
        UlcField { value: 0.0 }
    }

    pub fn traverse(&mut self, cost: f64) {
        self.value += cost;
    }
}

/// GRD's store: a dense score per catalog content plus the cached set.
#[derive(Debug, Clone, PartialEq)]
pub struct GrdStore {
    capacity: usize,
    cached: Vec<ContentId>,
    scores: Vec<f64>,
    alpha: f64,
}

// Scores below this are flushed to zero so long runs never crawl through
// subnormal arithmetic.
const SCORE_FLOOR: f64 = 1e-280;

impl GrdStore {
    pub fn new(capacity: usize, catalog_size: usize, alpha: f64) -> Self {
        GrdStore { capacity, cached: Vec::with_capacity(capacity), scores: vec![0.0; catalog_size], alpha }
    }

    pub fn contains(&self, content: ContentId) -> bool {
        self.cached.contains(&content)
    }

    pub fn score(&self, content: ContentId) -> f64 {
        self.scores[content]
    }

    pub fn set_score(&mut self, content: ContentId, score: f64) {
        self.scores[content] = score;
    }

    pub fn cached(&self) -> &[ContentId] {
        &self.cached
    }

    /// Inserts without scoring; for setting up states by hand.
    pub fn force_cache(&mut self, content: ContentId) {
        if !self.contains(content) && self.cached.len() < self.capacity {
            self.cached.push(content);
        }
    }

    /// Decays every score, boosts the arriving content by its ULC, then
    /// admits it if there is room or it outscores the weakest cached entry.
    pub fn admit(&mut self, content: ContentId, ulc: f64) -> Admission {
        let keep = 1.0 - self.alpha;
        for s in self.scores.iter_mut() {
            let v = *s * keep;
            *s = if v < SCORE_FLOOR { 0.0 } else { v };
        }
        self.scores[content] += self.alpha * ulc;
        if self.capacity == 0 || self.contains(content) {
            return Admission::Skipped;
        }
        if self.cached.len() < self.capacity {
            self.cached.push(content);
            return Admission::Inserted { evicted: None };
        }
        let (slot, &victim) = self
            .cached
            .iter()
            .enumerate()
            .min_by(|a, b| self.scores[*a.1].total_cmp(&self.scores[*b.1]).then(a.1.cmp(b.1)))
            .expect("full store is non-empty");
        if self.scores[content] > self.scores[victim] {
            self.cached[slot] = content;
            Admission::Inserted { evicted: Some(victim) }
        } else {
            Admission::Skipped
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Store {
    Policy(CacheState),
    Grd(GrdStore),
}

impl Store {
    pub fn contents(&self) -> BTreeSet<ContentId> {
        match self {
            Store::Policy(c) => c.contents(),
            Store::Grd(g) => g.cached.iter().copied().collect(),
        }
    }

    pub fn contains(&self, content: ContentId) -> bool {
        match self {
            Store::Policy(c) => c.contains(content),
            Store::Grd(g) => g.contains(content),
        }
    }
}

/// What a node decided when a request passed through it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    /// Admit the content when the data packet returns.
    Admit,
    /// Forward only; the returning content is not cached.
    Bypass,
    /// GRD admission is decided on the data packet.
    Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub hit: bool,
    pub mark: Mark,
    pub effective: bool,
}

/// Source of the effective-request coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coin {
    Flip(f64),
    ForceEffective,
    ForceNoneffective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Inserted { evicted: Option<ContentId> },
    Skipped,
}

/// All per-node state a strategy keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub store: Store,
    pub estimator: UtilEstimator,
}

impl NodeState {
    pub fn new(strategy: Strategy, capacity: usize, catalog_size: usize, alpha: f64) -> Result<Self, StrategyError> {
        let estimator = UtilEstimator::new(alpha)?;
        let store = match strategy {
            Strategy::Lce(p) | Strategy::UtilCache(p) => Store::Policy(CacheState::new(p, capacity)),
            Strategy::Static => Store::Policy(CacheState::new(Policy::Lru, capacity)),
            Strategy::Grd => Store::Grd(GrdStore::new(capacity, catalog_size, alpha)),
        };
        Ok(NodeState { store, estimator })
    }

    /// Request-path processing. `coin` is consulted only by UtilCache.
    pub fn on_request(&mut self, strategy: Strategy, content: ContentId, coin: Coin) -> Decision {
        match (&mut self.store, strategy) {
            (Store::Policy(cache), Strategy::UtilCache(_)) => {
                let effective = match coin {
                    Coin::Flip(u) => self.estimator.effective(content, u),
                    Coin::ForceEffective => true,
                    Coin::ForceNoneffective => false,
                };
                let hit = cache.lookup(content, effective);
                let mark = if effective { Mark::Admit } else { Mark::Bypass };
                Decision { hit, mark, effective }
            }
            (Store::Policy(cache), Strategy::Static) => {
                let hit = cache.lookup(content, false);
                Decision { hit, mark: Mark::Bypass, effective: false }
            }
            (Store::Policy(cache), _) => {
                let hit = cache.lookup(content, true);
                Decision { hit, mark: Mark::Admit, effective: true }
            }
            (Store::Grd(g), _) => Decision { hit: g.contains(content), mark: Mark::Candidate, effective: true },
        }
    }

    /// Data-path processing at a node below the serving node.
    pub fn on_data(&mut self, strategy: Strategy, content: ContentId, ulc: UlcField, mark: Mark) -> Admission {
        if matches!(strategy, Strategy::UtilCache(_) | Strategy::Grd) {
            self.estimator
                .update_estimate(content, ulc.value)
                .expect("accumulated link costs are non-negative");
        }
        match (&mut self.store, mark) {
            (Store::Grd(g), _) => g.admit(content, ulc.value),
            (Store::Policy(cache), Mark::Admit) if !cache.contains(content) => {
                let evicted = cache.insert(content).expect("checked not cached");
                if cache.contains(content) {
                    Admission::Inserted { evicted }
                } else {
                    Admission::Skipped
                }
            }
            _ => Admission::Skipped,
        }
    }

    pub fn contents(&self) -> BTreeSet<ContentId> {
        self.store.contents()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("u-lfu".parse::<Strategy>().unwrap(), Strategy::UtilCache(Policy::Lfu));
        assert_eq!("utilcache-lru".parse::<Strategy>().unwrap(), Strategy::UtilCache(Policy::Lru));
        assert_eq!("LCE-LFU".parse::<Strategy>().unwrap(), Strategy::Lce(Policy::Lfu));
        assert_eq!("grd".parse::<Strategy>().unwrap(), Strategy::Grd);
        assert!("probcache".parse::<Strategy>().is_err());
        for s in ["u-lfu", "u-lru", "lce-lfu", "lce-lru", "grd"] {
            assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn effective_ratio() {
        let mut est = UtilEstimator::new(0.1).unwrap();
        est.update_estimate(1, 100.0).unwrap();
        est.update_estimate(2, 50.0).unwrap();
        assert!(est.effective(1, 0.999_999));
        assert!(est.effective(2, 0.499));
        assert!(!est.effective(2, 0.5));
        assert!(est.effective(7, 0.999_999), "cold start");
    }

    #[test]
    fn ewma_updates() {
        let mut est = UtilEstimator::new(0.5).unwrap();
        assert_eq!(est.update_estimate(0, 40.0).unwrap(), 40.0);
        assert!(est.w_max() >= 40.0);
        let mut est = UtilEstimator::new(0.5).unwrap();
        est.update_estimate(0, 10.0).unwrap();
        assert_eq!(est.update_estimate(0, 20.0).unwrap(), 15.0);
        let mut est = UtilEstimator::new(0.1).unwrap();
        est.update_estimate(0, 100.0).unwrap();
        for _ in 0..100 {
            assert_eq!(est.update_estimate(0, 100.0).unwrap(), 100.0);
        }
        assert_eq!(est.update_estimate(0, -1.0), Err(StrategyError::NegativeUlc(-1.0)));
        assert!(UtilEstimator::new(0.0).is_err());
        assert!(UtilEstimator::new(1.5).is_err());
    }

    #[test]
    fn w_max_never_decreases() {
        let mut est = UtilEstimator::new(0.5).unwrap();
        est.update_estimate(0, 100.0).unwrap();
        est.update_estimate(0, 0.0).unwrap();
        assert_eq!(est.estimate(0), Some(50.0));
        assert_eq!(est.w_max(), 100.0);
    }

    fn util_node(capacity: usize) -> NodeState {
        NodeState::new(Strategy::UtilCache(Policy::Lru), capacity, 10, 0.1).unwrap()
    }

    #[test]
    fn noneffective_hit_leaves_cache() {
        let s = Strategy::UtilCache(Policy::Lru);
        let mut node = util_node(2);
        node.on_data(s, 1, UlcField { value: 5.0 }, Mark::Admit);
        node.on_data(s, 2, UlcField { value: 5.0 }, Mark::Admit);
        let before = node.store.clone();
        let d = node.on_request(s, 1, Coin::ForceNoneffective);
        assert!(d.hit);
        assert_eq!(d.mark, Mark::Bypass);
        assert_eq!(node.store, before);
    }

    #[test]
    fn effective_miss_admits_on_return() {
        let s = Strategy::UtilCache(Policy::Lru);
        let mut node = util_node(2);
        let d = node.on_request(s, 3, Coin::ForceEffective);
        assert_eq!((d.hit, d.mark), (false, Mark::Admit));
        let adm = node.on_data(s, 3, UlcField { value: 120.0 }, d.mark);
        assert_eq!(adm, Admission::Inserted { evicted: None });
        assert_eq!(node.estimator.estimate(3), Some(120.0));
    }

    #[test]
    fn noneffective_miss_updates_estimate_only() {
        let s = Strategy::UtilCache(Policy::Lru);
        let mut node = util_node(2);
        let d = node.on_request(s, 3, Coin::ForceNoneffective);
        let adm = node.on_data(s, 3, UlcField { value: 120.0 }, d.mark);
        assert_eq!(adm, Admission::Skipped);
        assert!(node.contents().is_empty());
        assert_eq!(node.estimator.estimate(3), Some(120.0));
    }

    #[test]
    fn lce_always_admits() {
        let s = Strategy::Lce(Policy::Lru);
        let mut node = NodeState::new(s, 1, 10, 0.1).unwrap();
        let d = node.on_request(s, 4, Coin::ForceNoneffective);
        assert_eq!(d.mark, Mark::Admit);
        node.on_data(s, 4, UlcField { value: 1.0 }, d.mark);
        assert!(node.contents().contains(&4));
        assert!(node.estimator.is_empty(), "LCE keeps no estimates");
    }

    #[test]
    fn grd_empty_store_admits() {
        let mut g = GrdStore::new(2, 5, 0.5);
        assert_eq!(g.admit(0, 10.0), Admission::Inserted { evicted: None });
    }

    #[test]
    fn grd_replaces_weakest_when_stronger() {
        // alpha = 0.5: after decay a:5, b:3; c gets 0.5 * 8 = 4 > 3
        let mut g = GrdStore::new(2, 3, 0.5);
        g.force_cache(0);
        g.force_cache(1);
        g.set_score(0, 10.0);
        g.set_score(1, 6.0);
        assert_eq!(g.admit(2, 8.0), Admission::Inserted { evicted: Some(1) });
        assert_eq!(g.score(0), 5.0);
        assert_eq!(g.score(2), 4.0);
    }

    #[test]
    fn grd_rejects_weaker() {
        // c reaches 0.5 * 4 = 2 < 3
        let mut g = GrdStore::new(2, 3, 0.5);
        g.force_cache(0);
        g.force_cache(1);
        g.set_score(0, 10.0);
        g.set_score(1, 6.0);
        assert_eq!(g.admit(2, 4.0), Admission::Skipped);
        assert_eq!(g.cached(), &[0, 1]);
    }

    #[test]
    fn ulc_accumulates() {
        let mut u = UlcField::new();
        assert_eq!(u.value, 0.0);
        u.traverse(10.0);
        u.traverse(100.0);
        assert_eq!(u.value, 110.0);
    }
}
