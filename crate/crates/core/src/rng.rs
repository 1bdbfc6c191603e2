//! Seeded random streams.
//!
//! Every stochastic routine in the crate draws from [`ChaCha20Rng`], which has a
//! fixed, platform-independent output. Independent substreams are addressed by
//! a `(seed, stream)` pair so work can be split (per player, per replicate)
//! without the result depending on how it is scheduled.

use rand::SeedableRng;
pub use rand_chacha::ChaCha20Rng as StreamRng;

/// Rng for stream `stream` under master `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finaliser; used to decorrelate derived seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-label seed (FNV-1a over the label, mixed with the master seed).
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(master ^ mix64(h))
}
