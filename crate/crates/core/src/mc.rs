//! Seeded Monte-Carlo plumbing.
//!
//! Samples are drawn in fixed-size chunks, each from its own ChaCha stream
//! keyed by `(seed, chunk index)`. Chunks may run on any thread; partial
//! results are combined in chunk order, so estimates do not depend on the
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type McRng = ChaCha8Rng;

pub const CHUNK_SIZE: usize = 1024;

pub fn rng_from_seed(seed: u64) -> McRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn chunk_rng(seed: u64, chunk: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f(rng, count)` over `ceil(total / CHUNK_SIZE)` chunks and returns the
/// per-chunk results in chunk order.
pub fn map_chunks<T, F>(seed: u64, total: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut McRng, usize) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(total - c * CHUNK_SIZE);
            let mut rng = chunk_rng(seed, c as u64);
            f(&mut rng, count)
        })
        .collect()
}

/// Running sum and sum of squares of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Standard error of the sample mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.mean();
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Mixes a base seed with tags into a new 64-bit seed (splitmix64 finalizer).
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut x = base;
    for &t in tags {
        x = splitmix(x ^ splitmix(t.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    x
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunk_results_independent_of_thread_count() {
        let f =
            |rng: &mut McRng, count: usize| (0..count).map(|_| rng.random::<f64>()).sum::<f64>();
        let a = map_chunks(11, 5000, f);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| map_chunks(11, 5000, f));
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        let expected = (5.0f64 / 3.0 / 4.0).sqrt();
        assert!((m.std_error() - expected).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, &[2]), derive_seed(1, &[3]));
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
    }
}
