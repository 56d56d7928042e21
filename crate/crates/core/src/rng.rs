//! Seeded random substreams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is
//! derived from a master seed, a purpose tag and a list of indices, so results
//! do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Graph = 1,
    Noise = 2,
    Trajectory = 3,
    TieBreak = 4,
    Fixture = 5,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed, a purpose and indices into one 64-bit seed.
pub fn derive_seed(master: u64, stream: Stream, indices: &[u64]) -> u64 {
    let mut h = splitmix(master ^ ((stream as u64) << 56));
    for &i in indices {
        h = splitmix(h ^ splitmix(i.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn substream(master: u64, stream: Stream, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, indices))
}
