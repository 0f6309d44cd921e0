//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8, a counter-based generator.
//! Independent substreams (Gibbs chains, benchmark realizations, fit
//! iterations) are selected with the ChaCha stream id, so a substream is a
//! pure function of `(seed, index)` and does not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in artifacts so runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9), seed_from_u64(seed), stream = substream index";

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes `index` into `seed` to derive a fresh base seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
