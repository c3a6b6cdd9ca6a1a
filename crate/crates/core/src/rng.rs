//! Counter-based seed derivation.
//!
//! Every random draw in a simulation run is keyed by `(master seed, stream)`
//! so that results do not depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a parent seed and a stream label.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ splitmix64(stream.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Stream labels used by the chain so that each block draws from its own
/// sequence.
pub mod stream {
    pub const TX_PHASE_NOISE: u64 = 1;
    pub const RX_PHASE_NOISE: u64 = 2;
    pub const THERMAL_NOISE: u64 = 3;
    pub const CHANNEL: u64 = 4;
    pub const SI_PACKET: u64 = 5;
    pub const DESIRED_PACKET: u64 = 6;
    pub const CHAIN: u64 = 7;
}
