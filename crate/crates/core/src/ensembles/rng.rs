//! Counter-based random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Domain tags keep streams of different experiment stages disjoint.
pub mod domain {
    pub const Z2_DRAW: u64 = 0x5a32;
    pub const U1_DRAW: u64 = 0x5531;
    pub const CHARGE: u64 = 0xc4a6;
    pub const SWAP: u64 = 0x5e1a;
    pub const MOMENT: u64 = 0x2d65;
    pub const PFC_PHASE: u64 = 0x7068_6173_6500;
}

/// Independent stream `index` under `(seed, domain)`.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(domain)));
    rng.set_stream(index);
    rng
}
