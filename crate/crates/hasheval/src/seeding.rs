//! Deterministic seed derivation.
//!
//! All randomness in this crate flows from a single master seed. Where an
//! operation needs several independent streams (parallel orthodrome
//! sampling chunks, per-class draws in the synthesizer), each stream's
//! seed is derived as `splitmix64(master ^ stream * GOLDEN)`, so results
//! are reproducible regardless of worker count or evaluation order.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for the given stream index under a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(GOLDEN);
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
