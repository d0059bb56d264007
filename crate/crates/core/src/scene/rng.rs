//! Labeled, reproducible random streams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Independent generator for `(master, label, index)`. Streams with
/// different labels or indices do not overlap in practice.
pub fn substream(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    let seed = splitmix64(splitmix64(master) ^ fnv1a(label) ^ splitmix64(index.wrapping_add(1)));
    ChaCha8Rng::seed_from_u64(seed)
}

/// `len` samples of zero-mean, unit-variance Gaussian white noise.
pub fn white_noise(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
