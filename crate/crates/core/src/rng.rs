//! Seeded random streams.
//!
//! Every consumer draws from ChaCha8 keyed by the run seed, with the ChaCha
//! stream id selecting the purpose. Word positions make the streams
//! counter-based: the `k`-th draw of a stream does not depend on how many
//! other streams were used before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes; the discriminant is the high half of the stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    SpanningFamily = 1,
    XiBlock = 2,
    RandomSubspaces = 3,
    Rounding = 4,
    RoundingFamilies = 5,
    SampledHyperplanes = 6,
    Experiments = 7,
}

/// Independent stream `index` of `purpose` under `seed`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}

/// A derived 64-bit seed, e.g. for handing one child seed to a sub-generator.
pub fn derive(seed: u64, purpose: Purpose, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, purpose, index).next_u64()
}
