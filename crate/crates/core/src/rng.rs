//! Named, splittable random streams.
//!
//! Every consumer of randomness derives its generator from the master seed,
//! a domain label and an index. ChaCha is counter based, so the stream for
//! account 17 does not depend on how many accounts were generated before it
//! or on which worker thread generated it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a, used only to turn a domain label into seed bits.
fn fnv1a(label: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Generator for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(domain));
    rng.set_stream(index);
    rng
}

/// Derive a child seed; used when a stage hands a seed to another crate.
pub fn derive_seed(seed: u64, domain: &str) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ fnv1a(domain);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
