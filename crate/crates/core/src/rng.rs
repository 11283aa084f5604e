//! Seed derivation and the generator used for every random draw.
//!
//! Streams come from `ChaCha8Rng`, a counter-based cipher generator whose
//! output is fixed across platforms. Child seeds are derived by folding
//! integer keys through the splitmix64 finalizer, so any (cell, trial) pair
//! can be regenerated in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix `parent` with a list of keys into a child seed.
pub fn derive_seed(parent: u64, keys: &[u64]) -> u64 {
    let acc = keys.iter().fold(splitmix64(parent), |acc, &k| {
        splitmix64(acc.rotate_left(17) ^ splitmix64(k))
    });
    splitmix64(acc ^ keys.len() as u64)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
