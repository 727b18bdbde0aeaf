//! Seeded, platform-independent random streams.
//!
//! Every stochastic operation takes its generator from the caller. ChaCha8 is
//! specified bit-for-bit, so a given seed reproduces the same draws everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeedRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a named pipeline stage, so stages can be rerun alone.
pub fn stage(seed: u64, stage: &str) -> SeedRng {
    // FNV-1a over the stage name, mixed into the run seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}
