//! Seeding and elementary variate sampling.
//!
//! Every trajectory owns a `ChaCha8Rng` built from a single 64-bit seed, so a
//! run is reproducible from `(parameters, seed)` alone. Ensembles derive one
//! seed per trajectory from the master seed with a SplitMix64 mix, which gives
//! independent, well-separated streams without any shared state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives the seed for trajectory `index` from an ensemble master seed.
///
/// SplitMix64 finalizer applied to `master + (index + 1) * gamma`; the same
/// `(master, index)` always maps to the same stream.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds the per-run generator for a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on the open interval (0, 1); zero is rejected so logarithms
/// of the result are always finite.
pub(crate) fn sample_unit_open<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Exponential waiting time with the given rate, via inverse CDF.
pub(crate) fn sample_exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    -sample_unit_open(rng).ln() / rate
}
