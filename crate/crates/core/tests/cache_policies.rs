use std::collections::{BTreeSet, HashMap, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use utilcache::cache::{CacheState, Policy};
use utilcache::strategy::UtilEstimator;

/// Linear-scan LFU: evict the smallest (frequency, last touch).
#[derive(Default)]
struct ScanLfu {
    capacity: usize,
    clock: u64,
    entries: HashMap<usize, (u64, u64)>,
}

impl ScanLfu {
    fn lookup(&mut self, c: usize, touch: bool) -> bool {
        match self.entries.get_mut(&c) {
            Some(e) => {
                if touch {
                    self.clock += 1;
                    *e = (e.0 + 1, self.clock);
                }
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, c: usize) -> Option<usize> {
        if self.capacity == 0 {
            return None;
        }
        let mut victim = None;
        if self.entries.len() == self.capacity {
            let (&v, _) = self.entries.iter().min_by_key(|(_, &key)| key).unwrap();
            self.entries.remove(&v);
            victim = Some(v);
        }
        self.clock += 1;
        self.entries.insert(c, (1, self.clock));
        victim
    }
}

/// Front is most recent.
struct ListLru {
    capacity: usize,
    order: VecDeque<usize>,
}

impl ListLru {
    fn lookup(&mut self, c: usize, touch: bool) -> bool {
        match self.order.iter().position(|&x| x == c) {
            Some(i) => {
                if touch {
                    self.order.remove(i);
                    self.order.push_front(c);
                }
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, c: usize) -> Option<usize> {
        if self.capacity == 0 {
            return None;
        }
        let victim = if self.order.len() == self.capacity { self.order.pop_back() } else { None };
        self.order.push_front(c);
        victim
    }
}

fn drive(seed: u64, capacity: usize, ops: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lfu = CacheState::new(Policy::Lfu, capacity);
    let mut lru = CacheState::new(Policy::Lru, capacity);
    let mut scan_lfu = ScanLfu { capacity, ..ScanLfu::default() };
    let mut list_lru = ListLru { capacity, order: VecDeque::new() };
    for _ in 0..ops {
        let c = rng.random_range(0..3 * capacity.max(1));
        let touch = rng.random_bool(0.8);
        assert_eq!(lfu.lookup(c, touch), scan_lfu.lookup(c, touch));
        assert_eq!(lru.lookup(c, touch), list_lru.lookup(c, touch));
        if !lfu.contains(c) {
            assert_eq!(lfu.insert(c).unwrap(), scan_lfu.insert(c));
        }
        if !lru.contains(c) {
            assert_eq!(lru.insert(c).unwrap(), list_lru.insert(c));
        }
        assert!(lfu.len() <= capacity && lru.len() <= capacity);
        assert_eq!(lfu.contents(), scan_lfu.entries.keys().copied().collect::<BTreeSet<_>>());
        assert_eq!(lru.contents(), list_lru.order.iter().copied().collect::<BTreeSet<_>>());
    }
    if let CacheState::Lru(inner) = &lru {
        assert_eq!(inner.recency_order(), list_lru.order.iter().copied().collect::<Vec<_>>());
    }
}

#[test]
fn policies_match_linear_scan_references() {
    for (seed, capacity) in [(1, 1), (2, 5), (3, 17), (4, 64)] {
        drive(seed, capacity, 10_000);
    }
}

#[test]
fn zero_capacity_never_stores() {
    for policy in [Policy::Lru, Policy::Lfu] {
        let mut cache = CacheState::new(policy, 0);
        assert_eq!(cache.insert(3).unwrap(), None);
        assert!(!cache.contains(3) && cache.is_empty());
    }
}

#[test]
fn double_insert_is_an_error() {
    for policy in [Policy::Lru, Policy::Lfu] {
        let mut cache = CacheState::new(policy, 2);
        cache.insert(1).unwrap();
        assert!(cache.insert(1).is_err());
    }
}

proptest! {
    #[test]
    fn untouched_lookups_change_nothing(seed in any::<u64>(), capacity in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for policy in [Policy::Lru, Policy::Lfu] {
            let mut cache = CacheState::new(policy, capacity);
            for _ in 0..50 {
                let c = rng.random_range(0..20);
                if !cache.lookup(c, true) {
                    cache.insert(c).unwrap();
                }
            }
            let before = cache.clone();
            for _ in 0..50 {
                cache.lookup(rng.random_range(0..20), false);
            }
            prop_assert_eq!(&cache, &before);
        }
    }
}

#[test]
fn cache_perceived_popularity_scales_with_utility() {
    let mut est = UtilEstimator::new(0.1).unwrap();
    est.update_estimate(0, 400.0).unwrap();
    est.update_estimate(1, 100.0).unwrap();
    est.update_estimate(2, 30.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 100_000;
    for (content, p) in [(0, 1.0), (1, 0.25), (2, 0.075)] {
        let hits = (0..n).filter(|_| est.effective(content, rng.random::<f64>())).count();
        let freq = hits as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sigma + 1e-12, "content {content}: {freq} vs {p}");
    }
}
