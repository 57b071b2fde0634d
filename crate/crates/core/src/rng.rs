//! Seeded, splittable random streams.
//!
//! Every stream is a ChaCha8 generator. The root stream for master seed `s`
//! is `ChaCha8Rng::seed_from_u64(s)` on stream 0. A sub-stream is addressed
//! by a path of `u64` tags (cell id, trial index, ...) folded through
//! SplitMix64 into a 64-bit ChaCha stream id under the same key, so trials
//! can be replayed in any order or in isolation.
//!
//! Normal variates come from `rand_distr::StandardNormal` (ziggurat), scaled
//! by the requested standard deviation. Consumption order is fixed by the
//! callers: codebooks are filled row-major.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

/// Recorded identity of a stream, suitable for config echoes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamId {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> StreamId {
        StreamId {
            seed: self.seed,
            stream: self.stream,
        }
    }

    /// Independent stream addressed by `path` below this one.
    ///
    /// Depends only on the seed, this stream's id and `path`; never on how
    /// much of this stream has been consumed.
    pub fn substream(&self, path: &[u64]) -> SeededRng {
        let stream = path.iter().fold(splitmix64(self.stream), |acc, &tag| {
            splitmix64(acc ^ splitmix64(tag))
        });
        Self::with_stream(self.seed, stream)
    }

    /// Uniform draw from the open interval `(0, 1)`.
    pub fn open_unit(&mut self) -> f64 {
        loop {
            let x: f64 = self.inner.random();
            if x > 0.0 {
                return x;
            }
        }
    }

    pub fn normal(&mut self, std_dev: f64) -> f64 {
        let z: f64 = self.inner.sample(StandardNormal);
        z * std_dev
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random()
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
