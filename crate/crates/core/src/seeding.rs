//! Named random sub-streams.
//!
//! All randomness in a run flows from one user seed. Each consumer asks for
//! a stream by name (and an index such as a graph id or a repeat number), so
//! stages stay reproducible on their own and parallel work never depends on
//! scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const WALKS: &str = "walks";
pub const INIT: &str = "init";
pub const SHUFFLES: &str = "shuffles";
pub const NEGATIVES: &str = "negatives";
pub const FOLDS: &str = "folds";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives a 64-bit seed for the stream `(name, index)` under `seed`.
pub fn derive(seed: u64, name: &str, index: u64) -> u64 {
    let a = splitmix64(seed ^ fnv1a(name.as_bytes()));
    splitmix64(a ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, name, index))
}
