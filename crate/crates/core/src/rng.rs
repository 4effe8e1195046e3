use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geom::Vec2;

/// Deterministic random stream. One `RandomStream` drives one generation
/// or simulation run; equal seeds give bit-identical draw sequences.
///
/// Backed by ChaCha8 so the sequence is stable across platforms within one
/// build of the artifact.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in [lo, hi). Degenerate ranges return `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    /// Uniform integer in [0, n).
    pub fn uniform_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform_index over empty range");
        self.rng.random_range(0..n)
    }

    /// Standard normal draw (mean 0, std 1).
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform point in the axis-aligned rectangle [0, width] x [0, height].
    pub fn point_in_rect(&mut self, width: f64, height: f64) -> Vec2 {
        Vec2::new(self.uniform(0.0, width), self.uniform(0.0, height))
    }

    /// Uniform point in the closed disc of given radius around the origin.
    /// Polar sampling: fixed draw count, no rejection.
    pub fn point_in_disc(&mut self, radius: f64) -> Vec2 {
        let r = radius * self.rng.random::<f64>().sqrt();
        let theta = self.uniform(0.0, std::f64::consts::TAU);
        Vec2::from_angle(theta) * r
    }
}

/// SplitMix64 finalizer; used to decorrelate derived seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a run seed from a base seed and a run index. XOR of a mixed base
/// with the index is injective in `index` for a fixed base, so no two runs
/// of one plan share a seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base) ^ index
}
