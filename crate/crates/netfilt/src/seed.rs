//! Deterministic sub-seed derivation.
//!
//! Every randomized stage of a run derives its own generator from one master
//! seed plus a list of integer tags (stage id, sweep index, replicate, ...).
//! Adding a new stage therefore never perturbs the draws of existing ones,
//! and parallel stages can be seeded independently of the schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STAGE_GRAPH: u64 = 1;
pub const STAGE_WEIGHTS: u64 = 2;
pub const STAGE_TRAIN: u64 = 3;
pub const STAGE_TEST: u64 = 4;
pub const STAGE_CV: u64 = 5;
pub const STAGE_TARGET: u64 = 6;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a sequence of tags into a new 64-bit seed.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &t in tags {
        s = splitmix64(s ^ splitmix64(t));
    }
    s
}

/// A ChaCha generator for the given (master, tags) pair.
pub fn rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, tags))
}
