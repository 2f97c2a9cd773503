//! Bounded per-node content stores with LRU or in-cache LFU replacement.
//!
//! Lookups take a `touch` flag. With `touch = false` the store is only
//! peeked and its state, including replacement metadata, is left
//! bit-identical.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::ContentId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CacheError {
    #[error("content {0} is already cached")]
    AlreadyCached(ContentId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Lru,
    Lfu,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Lru => "lru",
            Policy::Lfu => "lfu",
        }
    }
}

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
struct Slot {
    content: ContentId,
    prev: usize,
    next: usize,
}

/// LRU over a slab-backed doubly linked list. `head` is the most recent
/// entry, `tail` the eviction victim.
#[derive(Debug, Clone, PartialEq)]
pub struct Lru {
    capacity: usize,
    index: HashMap<ContentId, usize>,
    slots: Vec<Slot>,
    free: Vec<usize>,
    head: usize,
    tail: usize,
}

impl Lru {
    pub fn new(capacity: usize) -> Self {
        Lru {
            capacity,
            index: HashMap::with_capacity(capacity),
            slots: Vec::with_capacity(capacity),
            free: Vec::new(),
            head: NIL,
            tail: NIL,
        }
    }

    fn unlink(&mut self, i: usize) {
        let (prev, next) = (self.slots[i].prev, self.slots[i].next);
        if prev == NIL {
            self.head = next;
        } else {
            self.slots[prev].next = next;
        }
        if next == NIL {
            self.tail = prev;
        } else {
            self.slots[next].prev = prev;
        }
    }

    fn push_front(&mut self, i: usize) {
        self.slots[i].prev = NIL;
        self.slots[i].next = self.head;
        if self.head != NIL {
            self.slots[self.head].prev = i;
        }
        self.head = i;
        if self.tail == NIL {
            self.tail = i;
        }
    }

    fn lookup(&mut self, content: ContentId, touch: bool) -> bool {
        match self.index.get(&content) {
            Some(&i) => {
                if touch && self.head != i {
                    self.unlink(i);
                    self.push_front(i);
                }
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, content: ContentId) -> Option<ContentId> {
        if self.capacity == 0 {
            return None;
        }
        let mut evicted = None;
        if self.index.len() == self.capacity {
            let victim = self.tail;
            self.unlink(victim);
            let old = self.slots[victim].content;
            self.index.remove(&old);
            self.free.push(victim);
            evicted = Some(old);
        }
        let slot = Slot { content, prev: NIL, next: NIL };
        let i = match self.free.pop() {
            Some(i) => {
                self.slots[i] = slot;
                i
            }
            None => {
                self.slots.push(slot);
                self.slots.len() - 1
            }
        };
        self.push_front(i);
        self.index.insert(content, i);
        evicted
    }

    /// Cached contents from most to least recently used.
    pub fn recency_order(&self) -> Vec<ContentId> {
        let mut out = Vec::with_capacity(self.index.len());
        let mut i = self.head;
        while i != NIL {
            out.push(self.slots[i].content);
            i = self.slots[i].next;
        }
        out
    }
}

/// In-cache LFU: counts live only while an entry is cached. Victim is the
/// minimum `(frequency, last touch)` pair, i.e. least recently touched among
/// the least frequent.
#[derive(Debug, Clone, PartialEq)]
pub struct Lfu {
    capacity: usize,
    entries: HashMap<ContentId, (u64, u64)>,
    order: BTreeSet<(u64, u64, ContentId)>,
    clock: u64,
}

impl Lfu {
    pub fn new(capacity: usize) -> Self {
        Lfu { capacity, entries: HashMap::with_capacity(capacity), order: BTreeSet::new(), clock: 0 }
    }

    fn lookup(&mut self, content: ContentId, touch: bool) -> bool {
        let Some(&(freq, stamp)) = self.entries.get(&content) else {
            return false;
        };
        if touch {
            self.order.remove(&(freq, stamp, content));
            self.clock += 1;
            let key = (freq + 1, self.clock);
            self.entries.insert(content, key);
            self.order.insert((key.0, key.1, content));
        }
        true
    }

    fn insert(&mut self, content: ContentId) -> Option<ContentId> {
        if self.capacity == 0 {
            return None;
        }
        let mut evicted = None;
        if self.entries.len() == self.capacity {
            let (_, _, victim) = self.order.pop_first().expect("full cache has entries");
            self.entries.remove(&victim);
            evicted = Some(victim);
        }
        self.clock += 1;
        self.entries.insert(content, (1, self.clock));
        self.order.insert((1, self.clock, content));
        evicted
    }

    pub fn frequency(&self, content: ContentId) -> Option<u64> {
        self.entries.get(&content).map(|&(f, _)| f)
    }
}

/// A node's content store.
#[derive(Debug, Clone, PartialEq)]
pub enum CacheState {
    Lru(Lru),
    Lfu(Lfu),
}

impl CacheState {
    pub fn new(policy: Policy, capacity: usize) -> Self {
        match policy {
            Policy::Lru => CacheState::Lru(Lru::new(capacity)),
            Policy::Lfu => CacheState::Lfu(Lfu::new(capacity)),
        }
    }

    pub fn policy(&self) -> Policy {
        match self {
            CacheState::Lru(_) => Policy::Lru,
            CacheState::Lfu(_) => Policy::Lfu,
        }
    }

    pub fn capacity(&self) -> usize {
        match self {
            CacheState::Lru(c) => c.capacity,
            CacheState::Lfu(c) => c.capacity,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CacheState::Lru(c) => c.index.len(),
            CacheState::Lfu(c) => c.entries.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, content: ContentId) -> bool {
        match self {
            CacheState::Lru(c) => c.index.contains_key(&content),
            CacheState::Lfu(c) => c.entries.contains_key(&content),
        }
    }

    /// Membership test; `touch` refreshes the replacement metadata on a hit.
    pub fn lookup(&mut self, content: ContentId, touch: bool) -> bool {
        match self {
            CacheState::Lru(c) => c.lookup(content, touch),
            CacheState::Lfu(c) => c.lookup(content, touch),
        }
    }

    /// Admits `content`, returning the evicted victim if the store was full.
    /// A zero-capacity store silently admits nothing.
    pub fn insert(&mut self, content: ContentId) -> Result<Option<ContentId>, CacheError> {
        if self.contains(content) {
            return Err(CacheError::AlreadyCached(content));
        }
        let evicted = match self {
            CacheState::Lru(c) => c.insert(content),
            CacheState::Lfu(c) => c.insert(content),
        };
        debug_assert!(self.len() <= self.capacity());
        Ok(evicted)
    }

    pub fn contents(&self) -> BTreeSet<ContentId> {
        match self {
            CacheState::Lru(c) => c.index.keys().copied().collect(),
            CacheState::Lfu(c) => c.entries.keys().copied().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: ContentId = 1;
    const B: ContentId = 2;
    const C: ContentId = 3;

    #[test]
    fn empty_miss_leaves_state() {
        for policy in [Policy::Lru, Policy::Lfu] {
            let mut cache = CacheState::new(policy, 2);
            let before = cache.clone();
            assert!(!cache.lookup(A, true));
            assert_eq!(cache, before);
        }
    }

    #[test]
    fn lru_touch_protects_entry() {
        let mut cache = CacheState::new(Policy::Lru, 2);
        cache.insert(A).unwrap();
        cache.insert(B).unwrap();
        assert!(cache.lookup(A, true));
        assert_eq!(cache.insert(C).unwrap(), Some(B));
    }

    #[test]
    fn lru_peek_does_not_protect() {
        let mut cache = CacheState::new(Policy::Lru, 2);
        cache.insert(A).unwrap();
        cache.insert(B).unwrap();
        let before = cache.clone();
        assert!(cache.lookup(A, false));
        assert_eq!(cache, before);
        assert_eq!(cache.insert(C).unwrap(), Some(A));
    }

    #[test]
    fn zero_capacity_admits_nothing() {
        for policy in [Policy::Lru, Policy::Lfu] {
            let mut cache = CacheState::new(policy, 0);
            assert_eq!(cache.insert(A).unwrap(), None);
            assert!(cache.is_empty());
        }
    }

    #[test]
    fn lfu_evicts_least_frequent() {
        let mut cache = CacheState::new(Policy::Lfu, 2);
        cache.insert(A).unwrap();
        cache.insert(B).unwrap();
        cache.lookup(A, true);
        cache.lookup(A, true);
        assert_eq!(cache.insert(C).unwrap(), Some(B));
    }

    #[test]
    fn lfu_ties_go_to_least_recent() {
        let mut cache = CacheState::new(Policy::Lfu, 2);
        cache.insert(A).unwrap();
        cache.insert(B).unwrap();
        cache.lookup(A, true);
        cache.lookup(B, true);
        // both at frequency 2, A touched longer ago
        assert_eq!(cache.insert(C).unwrap(), Some(A));
    }

    #[test]
    fn lfu_counts_reset_on_eviction() {
        let mut cache = CacheState::new(Policy::Lfu, 1);
        cache.insert(A).unwrap();
        for _ in 0..5 {
            cache.lookup(A, true);
        }
        let CacheState::Lfu(inner) = &cache else { unreachable!() };
        assert_eq!(inner.frequency(A), Some(6));
        cache.insert(B).unwrap();
        cache.insert(A).unwrap();
        let CacheState::Lfu(inner) = &cache else { unreachable!() };
        assert_eq!(inner.frequency(A), Some(1));
    }

    #[test]
    fn double_insert_is_error() {
        let mut cache = CacheState::new(Policy::Lru, 2);
        cache.insert(A).unwrap();
        assert_eq!(cache.insert(A), Err(CacheError::AlreadyCached(A)));
    }

    #[test]
    fn contents_snapshot() {
        let mut cache = CacheState::new(Policy::Lru, 2);
        cache.insert(A).unwrap();
        cache.insert(B).unwrap();
        assert_eq!(cache.contents(), BTreeSet::from([A, B]));
        cache.lookup(A, true);
        cache.insert(C).unwrap();
        assert_eq!(cache.contents(), BTreeSet::from([A, C]));
        let CacheState::Lru(inner) = &cache else { unreachable!() };
        assert_eq!(inner.recency_order(), vec![C, A]);
    }
}
