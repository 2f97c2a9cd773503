//! Seeded, portable random streams. Every purpose draws from its own ChaCha8
//! stream derived from the run seed, so adding draws for one purpose never
//! shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Arrivals = 1,
    Contents = 2,
    Requesters = 3,
    StrategyCoins = 4,
    LinkCosts = 5,
}

pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
