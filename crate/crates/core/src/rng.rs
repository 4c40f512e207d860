//! Counter-addressable random streams.
//!
//! A stream is keyed by `(seed, lane)` and indexed by a 64-bit replicate
//! number, so replicate `i` of a run draws the same numbers regardless of how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every simulator.
pub type SimRng = ChaCha8Rng;

/// Independent purposes that draw from the same user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    Csbp = 1,
    Marks = 2,
    Tree = 3,
    Brownian = 4,
    Xi = 5,
    XiOracle = 6,
    Test = 99,
}

/// Generator for replicate `index` of `lane` under `seed`.
pub fn stream(seed: u64, lane: Lane, index: u64) -> SimRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(lane as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
