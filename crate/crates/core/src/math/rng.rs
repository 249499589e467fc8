use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Name of the generator, written into serialized models.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Deterministic random source: ChaCha8 keyed from a 64-bit seed.
///
/// Streams are portable across platforms. [`SeededRng::fork`] derives an
/// independent generator on a separate ChaCha stream of the same key, which
/// is how callers split randomness between subsystems without sharing state.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh generator keyed by the same seed on stream `stream`.
    pub fn fork(&self, stream: u64) -> SeededRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        SeededRng {
            seed: self.seed,
            inner,
        }
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u: f64 = self.inner.random();
        lo + (hi - lo) * u
    }

    /// Uniform draw from the open interval `(lo, hi)`.
    pub fn open_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        loop {
            let v = self.uniform(lo, hi);
            if v > lo && v < hi {
                return v;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.inner.random_range(0..n as u64) as usize
    }

    /// Fisher-Yates shuffle driven by [`SeededRng::below`].
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniformly random `k`-subset of `0..n`, in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// Mixes a stream index into a seed; index 0 returns the seed unchanged.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
