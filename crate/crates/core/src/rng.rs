//! Seeded, portable random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by
//! `(seed, purpose)` and selected by an index (usually the point index), so
//! point `i` of a generator sees the same numbers regardless of how many
//! other points are drawn or in which order.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// What a stream is used for; keeps dataset draws and initialization draws
/// independent even when they share a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Dataset = 0x6461_7461,
    Initialization = 0x696e_6974,
    Shuffle = 0x7368_7566,
    Sampling = 0x7361_6d70,
}

/// Stream `index` of the generator keyed by `(seed, purpose)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn standard_normal<R: rand_core::RngCore>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Fills `out` with i.i.d. standard normals.
pub fn fill_standard_normal<R: rand_core::RngCore>(rng: &mut R, out: &mut [f64]) {
    for v in out {
        *v = standard_normal(rng);
    }
}
