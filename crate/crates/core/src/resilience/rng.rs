//! Portable random streams.
//!
//! Every stream is a `ChaCha8Rng` seeded with a 64-bit value. Substream
//! seeds are derived by [`derive_seed`], a splitmix64 finalizer applied to
//! the parent seed combined with a tag, so a cell's noise depends only on
//! its coordinates and never on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the substream `tag` of `parent`.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag))
}

/// 64-bit FNV-1a hash, used to turn instance ids into tags.
pub fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of the noise stream for one `(instance, encoding, ε)` cell.
pub fn cell_seed(master: u64, instance: &str, encoding: usize, epsilon: usize) -> u64 {
    let s = derive_seed(master, fnv1a(instance));
    let s = derive_seed(s, encoding as u64);
    derive_seed(s, epsilon as u64)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal draw by the Box–Muller transform; consumes exactly
/// two 64-bit words.
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - unit(rng); // in (0, 1]
    let u2 = unit(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
