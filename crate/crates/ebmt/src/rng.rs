//! Deterministic per-replicate random streams.
//!
//! Every `(scenario, replicate)` pair gets its own ChaCha8 stream derived
//! from the master seed by pure 64-bit integer mixing, so results do not
//! depend on thread count, scheduling, or the order replicates happen to run
//! in. The derivation is fixed and documented here so another implementation
//! (in any language) can reproduce the exact streams:
//!
//! 1. `key = (scenario_index << 32) | replicate_index`, both taken mod 2^32.
//! 2. `base = master_seed ^ mix64(key)`.
//! 3. The 256-bit ChaCha8 seed is the little-endian concatenation of
//!    `mix64(base + 1)`, `mix64(base + 2)`, `mix64(base + 3)`, `mix64(base + 4)`.
//!
//! `mix64` is the SplitMix64 output finalizer (Steele, Lea, Flood 2014):
//! xor-shift by 30, multiply by 0xBF58476D1CE4E5B9, xor-shift by 27, multiply
//! by 0x94D049BB133111EB, xor-shift by 31. All arithmetic wraps mod 2^64.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Short name for the stream derivation scheme, recorded alongside results so
/// runs can state how their randomness was produced.
pub const RNG_SCHEME: &str = "splitmix64-finalizer/chacha8";

/// SplitMix64 output finalizer. Bijective on u64, so distinct replicate keys
/// can never collide before the xor with the master seed.
pub fn mix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds the ChaCha8 stream for one replicate of one scenario.
pub fn replicate_rng(master_seed: u64, scenario_index: u64, replicate_index: u64) -> ChaCha8Rng {
    let key = ((scenario_index & 0xFFFF_FFFF) << 32) | (replicate_index & 0xFFFF_FFFF);
    let base = master_seed ^ mix64(key);
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        let word = mix64(base.wrapping_add(i as u64 + 1));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
