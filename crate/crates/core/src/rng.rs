//! Seeded, splittable random streams.
//!
//! Every random object in the crate is driven by a [`ChaCha8Rng`] derived
//! from a `(seed, stream)` pair. Replicate `r` of an experiment always uses
//! stream `r`, so results do not depend on how replicates are scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` of the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a sub-seed so that independent roles inside one replicate
/// (discrete forest, continuum path, SDE) never share a stream.
pub fn derive_seed(seed: u64, role: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ role.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
