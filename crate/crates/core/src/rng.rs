//! Seed derivation for deterministic simulations.
//!
//! A run is driven by one `u64` seed. Every node gets its own independent
//! stream per purpose, derived by hashing `(seed, node, stream)`, so adding
//! draws to one purpose (say, diagnostics) never perturbs another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Protocol coin flips (marking, transmit decisions, shifts).
pub const STREAM_PROTOCOL: u64 = 0;
/// 64-bit node identifier generation.
pub const STREAM_ID: u64 = 1;
/// Diagnostic draws, never consumed by protocols.
pub const STREAM_DIAG: u64 = 2;
/// Leader-election candidacy draws (kept apart from in-simulation coins).
pub const STREAM_ELECTION: u64 = 3;

/// splitmix64 finalizer; good enough to decorrelate seed material.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mix an arbitrary tuple of words into one sub-seed.
pub fn mix(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b.wrapping_add(0x6a09e667f3bcc909)))
}

/// The RNG for a given node and stream.
pub fn node_rng(seed: u64, node: usize, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, node as u64, stream))
}

/// A uniform coin in [0,1) derived purely from hashed words; used where
/// several nodes must flip the *same* coin (cluster-coordinated decisions).
pub fn coordinated_unit(seed: u64, a: u64, b: u64) -> f64 {
    // 53 high bits -> [0,1)
    (mix(seed, a, b) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
