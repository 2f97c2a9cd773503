//! LRU and LFU side by side on the same access sequence, including
//! lookups that do not touch replacement metadata.

use utilcache::cache::{CacheState, Policy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let accesses = [1, 2, 1, 3, 1, 2, 4, 5, 2];
    for policy in [Policy::Lru, Policy::Lfu] {
        let mut cache = CacheState::new(policy, 3);
        print!("{:<4}", policy.name());
        for &c in &accesses {
            if cache.lookup(c, true) {
                print!(" hit{c}");
            } else if let Some(victim) = cache.insert(c)? {
                print!(" +{c}-{victim}");
            } else {
                print!(" +{c}");
            }
        }
        // a silent lookup leaves the order alone
        cache.lookup(5, false);
        println!("  -> {:?}", cache.contents());
    }
    Ok(())
}
