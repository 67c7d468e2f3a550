//! Counter-keyed random substreams.
//!
//! Every random draw in an experiment comes from a ChaCha stream whose seed
//! is derived from the master seed and a key path such as
//! `[experiment, trial, domain, index]`. A trial therefore sees the same
//! numbers no matter which thread runs it or in what order trials finish.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SubRng = ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for `master` and the key `path`.
pub fn substream(master: u64, path: &[u64]) -> SubRng {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for &k in path {
        state ^= acc.rotate_left(17) ^ k;
        acc = splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Key domains used to separate the draws belonging to one trial.
pub mod domain {
    pub const ACQUISITION: u64 = 0xAC;
    pub const TRACKING: u64 = 0x7C;
    pub const CALIBRATION: u64 = 0xCA;
    pub const RANDOM_AF: u64 = 0xAF;
    pub const OFFSET: u64 = 1;
    pub const TAP: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const SEQUENCE: u64 = 4;
    pub const TARGETS: u64 = 5;
}
