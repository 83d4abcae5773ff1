//! Deterministic stream seeding.
//!
//! Every random stream is keyed by (base seed, stream domain, sample size,
//! replicate index) through a SplitMix64 expansion, so a replicate's draws
//! never depend on scheduling, worker count, or the draws of any other
//! replicate. Path and indicator streams use distinct domains and are
//! therefore independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains; each gets an unrelated ChaCha key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Path = 1,
    Indicator = 2,
    KyFan = 3,
    Oracle = 4,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for one replicate of one stream.
pub fn replicate_rng(base_seed: u64, stream: Stream, n: u64, replicate: u64) -> ChaCha8Rng {
    let mut state = splitmix(base_seed);
    state = splitmix(state ^ (stream as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    state = splitmix(state ^ n.wrapping_mul(0xe703_7ed1_a0b4_28db));
    state = splitmix(state ^ replicate.wrapping_mul(0x8ebc_6af0_9c88_c6e3));
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
