//! Seedable random streams with independent substreams per (seed, index).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// The stream for item `index` of a computation seeded with `seed`. Streams for
/// different indices do not overlap, so work can be split across threads freely.
pub fn substream(seed: u64, index: u64) -> RandomStream {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Uniform variate on the open interval (0, 1).
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.gen::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
