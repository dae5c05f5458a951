//! Seeded random streams.
//!
//! Every random choice in the simulator draws from a ChaCha8 stream keyed by a
//! 64-bit seed. Independent purposes (generation, failure selection, message
//! sampling) use disjoint stream ids under the same key, so changing how many
//! values one purpose consumes never shifts another. Integer and float
//! conversions are done here rather than through `rand` so that outputs stay
//! bit-identical across crate upgrades and platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. The discriminant occupies the top bits of the
/// ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Generation = 1,
    FixedDegreeGeneration = 2,
    Failure = 3,
    Messages = 4,
    Seeds = 5,
}

const INDEX_BITS: u32 = 56;

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    /// Stream `index` of `purpose` under `seed`. `index` must fit in 56 bits.
    pub fn substream(seed: u64, purpose: Purpose, index: u64) -> Self {
        debug_assert!(index < (1 << INDEX_BITS));
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(((purpose as u64) << INDEX_BITS) | (index & ((1 << INDEX_BITS) - 1)));
        SimRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, n). Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // reject the short tail so every residue is equally likely
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }
}

/// Derive a child seed, e.g. the generation seed of candidate sample `index`.
pub fn derive_seed(master: u64, purpose: Purpose, index: u64) -> u64 {
    SimRng::substream(master, purpose, index).next_u64()
}
