//! Deterministic, schedule-independent random sampling.
//!
//! Sample streams are partitioned into fixed-size blocks; block `k` of a
//! stream with seed `s` draws from a ChaCha8 generator seeded with
//! `mix(s, k)`. Results are therefore identical whether blocks are produced
//! sequentially or in parallel, and independent of worker count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// SplitMix64 finalizer; decorrelates (seed, block) pairs.
fn mix(seed: u64, block: u64) -> u64 {
    let mut z = seed ^ block.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for block `block` of the stream identified by `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, block))
}

/// A deterministic set of unit directions on the sphere S^{n-1}.
///
/// In the plane the points are equally spaced angles with a seeded phase
/// (low discrepancy); in higher dimension they are seeded Gaussian draws
/// normalized to the sphere.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    count: usize,
    seed: u64,
    dim: usize,
    points: Vec<DVector<f64>>,
}

impl DirectionSet {
    pub fn new(dim: usize, count: usize, seed: u64) -> Self {
        assert!(dim >= 1, "direction set needs a positive dimension");
        assert!(count >= 1, "direction set needs at least one direction");
        let mut points = Vec::with_capacity(count);
        if dim == 2 {
            let mut rng = block_rng(seed, 0);
            let phase: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            for k in 0..count {
                let theta = phase + std::f64::consts::TAU * (k as f64) / (count as f64);
                points.push(DVector::from_vec(vec![theta.cos(), theta.sin()]));
            }
        } else {
            let mut k = 0u64;
            while points.len() < count {
                let mut rng = block_rng(seed, k);
                let mut v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = v.norm();
                if norm > 1e-8 {
                    v /= norm;
                    points.push(v);
                }
                k += 1;
            }
        }
        // Renormalize so the unit-norm invariant holds to strict tolerance.
        for p in &mut points {
            let n = p.norm();
            *p /= n;
        }
        Self { count, seed, dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.points.iter()
    }
}
