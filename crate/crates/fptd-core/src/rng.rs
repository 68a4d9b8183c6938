//! Counter-based splittable random streams.
//!
//! Every Monte Carlo path gets its own ChaCha8 stream addressed by
//! `(master_seed, path_index)`: the seed fixes the key, the path index selects
//! the stream. Streams are statistically independent and can be created in any
//! order from any thread, so an estimate depends only on the seed and the set
//! of path indices, never on scheduling. Within one path, draws are consumed
//! in a documented order (jump gaps, then per-segment increments and jumps,
//! then bridge Bernoullis, then refinement draws), which makes whole runs
//! reproducible bit for bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// One path's private random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    /// Stream for path `path_index` under `master_seed`.
    pub fn for_path(master_seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(path_index);
        RandomStream { rng }
    }

    /// Uniform on the open interval (0, 1): `(n >> 11 | 0.5) * 2^-53` keeps
    /// both endpoints strictly excluded so logs and quantiles are finite.
    pub fn uniform(&mut self) -> f64 {
        (((self.rng.next_u64() >> 11) as f64) + 0.5) * INV_2_53
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms and
    /// keeps no spare, so the draw count per call is constant.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(TWO_PI * u2)
    }

    /// Exponential with the given rate (mean `1/rate`); one uniform.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -libm::log(self.uniform()) / rate
    }

    /// Bernoulli(p); one uniform. Exact at p = 0 and p = 1 because uniforms
    /// are strictly inside (0, 1).
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
