//! Deterministic rough sample paths: a Weierstrass-type lacunary cosine sum
//! with seeded phases, genuinely C^α at every resolution the grid can see.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// W_α(t) = Σ_{k=1}^{K} 2^{-kα} cos(2^k π t + θ_k). Starting the sum at k = 1
/// keeps every term 1-periodic, so the path lives on the torus without a
/// wraparound jump.
#[derive(Clone, Debug)]
pub struct Weierstrass {
    alpha: f64,
    phases: Vec<f64>,
}

impl Weierstrass {
    pub fn new(alpha: f64, k_terms: usize, seed: u64) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0 && k_terms >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases = (0..k_terms)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        Weierstrass { alpha, phases }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &phase) in self.phases.iter().enumerate() {
            let k = (i + 1) as i32;
            let freq = 2.0f64.powi(k) * std::f64::consts::PI;
            acc += 2.0f64.powf(-(k as f64) * self.alpha) * (freq * t + phase).cos();
        }
        acc
    }

    /// Samples with the value at t=0 subtracted, so the result qualifies as a
    /// C^α_0 input (h(0) = 0).
    pub fn sample_centered(&self, points: impl Iterator<Item = f64>) -> Vec<f64> {
        let offset = self.eval(0.0);
        points.map(|t| self.eval(t) - offset).collect()
    }
}

/// Brute-force sampled Hölder constant sup |h(x)-h(y)| / dist(x,y)^α over all
/// grid pairs; `periodic` selects the torus distance.
pub fn sampled_holder_constant(samples: &[f64], alpha: f64, periodic: bool) -> f64 {
    let n = samples.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut dist = (j - i) as f64 / n as f64;
            if periodic && dist > 0.5 {
                dist = 1.0 - dist;
            }
            if dist == 0.0 {
                continue;
            }
            let q = (samples[i] - samples[j]).abs() / dist.powf(alpha);
            if q > best {
                best = q;
            }
        }
    }
    best
}
