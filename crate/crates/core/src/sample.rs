//! Seeded, platform-independent sampling.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::quaternion::Point4;

/// Seed of the fixed evaluation sample.
pub const EVALUATION_SEED: u64 = 0x5eed_c1c1e;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn gaussian_point(rng: &mut SeededRng) -> Point4 {
    Point4(std::array::from_fn(|_| normal(rng)))
}

pub fn unit_vector(rng: &mut SeededRng) -> Point4 {
    loop {
        let p = gaussian_point(rng);
        let n = p.norm();
        if n > 1e-8 {
            return p * (1.0 / n);
        }
    }
}

/// The 4 basis vectors, their 6 pairwise sums and 20 seeded unit vectors.
pub fn evaluation_sample() -> &'static [Point4] {
    static SAMPLE: OnceLock<Vec<Point4>> = OnceLock::new();
    SAMPLE.get_or_init(|| {
        let mut out: Vec<Point4> = (0..4).map(Point4::basis).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                out.push(Point4::basis(i) + Point4::basis(j));
            }
        }
        let mut r = rng(EVALUATION_SEED);
        out.extend((0..20).map(|_| unit_vector(&mut r)));
        out
    })
}

/// A spherical shell `inner ≤ |x − center| ≤ outer` in R⁴.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Point4,
    pub inner: f64,
    pub outer: f64,
}

impl Region {
    pub fn ball(radius: f64) -> Self {
        Region {
            center: Point4::ZERO,
            inner: 0.0,
            outer: radius,
        }
    }

    pub fn shell(inner: f64, outer: f64) -> Self {
        Region {
            center: Point4::ZERO,
            inner,
            outer,
        }
    }

    /// Volume-uniform sample.
    pub fn sample(&self, rng: &mut SeededRng) -> Point4 {
        let dir = unit_vector(rng);
        let lo = self.inner.powi(4);
        let hi = self.outer.powi(4);
        let r = uniform(rng, lo, hi.max(lo + f64::MIN_POSITIVE)).powf(0.25);
        self.center + dir * r
    }

    pub fn contains(&self, p: &Point4) -> bool {
        let d = p.distance(&self.center);
        d >= self.inner && d <= self.outer
    }
}
