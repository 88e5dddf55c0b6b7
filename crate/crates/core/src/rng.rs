//! Brownian increments keyed by `(seed, path index, step index)`.
//!
//! Every path owns a ChaCha8 stream whose key is built from the master seed
//! and the path index, so a path's increments do not depend on which thread
//! produced it or on how many other paths were drawn before it. Extra
//! randomness needed to refine a single step (a Brownian bridge) comes from
//! a separate stream keyed additionally by the step index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const PATH_TAG: u64 = 0x5f1e_0000_0000_0001;
const BRIDGE_TAG: u64 = 0x5f1e_0000_0000_0002;

fn keyed_rng(words: [u64; 4]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// `steps` standard Brownian increments of variance `dt` for one path.
pub fn brownian_increments(seed: u64, path_index: u64, steps: usize, dt: f64) -> Vec<f64> {
    let mut rng = keyed_rng([seed, path_index, 0, PATH_TAG]);
    let scale = dt.sqrt();
    (0..steps)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect()
}

/// Split the increment `total` over a step of length `dt` into `pieces`
/// sub-increments drawn from the Brownian bridge, i.e. from the law of the
/// sub-increments conditioned on their sum.
pub fn bridge_increments(seed: u64, path_index: u64, step_index: u64, total: f64, dt: f64, pieces: usize) -> Vec<f64> {
    let mut rng = keyed_rng([seed, path_index, step_index, BRIDGE_TAG]);
    let h = dt / pieces as f64;
    let raw: Vec<f64> = (0..pieces)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * h.sqrt()
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / pieces as f64;
    let share = total / pieces as f64;
    raw.into_iter().map(|x| x - mean + share).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_are_keyed_by_path() {
        let a = brownian_increments(7, 3, 100, 1e-2);
        let b = brownian_increments(7, 3, 100, 1e-2);
        let c = brownian_increments(7, 4, 100, 1e-2);
        assert_eq!(a, b);
        assert_ne!(a, c);
        // A shorter request is a prefix of a longer one.
        assert_eq!(&brownian_increments(7, 3, 10, 1e-2)[..], &a[..10]);
    }

    #[test]
    fn increment_variance() {
        let dt = 0.01;
        let x = brownian_increments(1, 0, 200_000, dt);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * (dt / n).sqrt());
        assert!((var / dt - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn bridge_sums_to_total() {
        let parts = bridge_increments(1, 2, 3, 0.37, 1e-3, 16);
        assert_eq!(parts.len(), 16);
        assert!((parts.iter().sum::<f64>() - 0.37).abs() < 1e-14);
        assert_eq!(parts, bridge_increments(1, 2, 3, 0.37, 1e-3, 16));
    }

    #[test]
    fn bridge_piece_variance() {
        // Var of one bridge piece: h (1 - 1/n).
        let (dt, n) = (1.0, 4usize);
        let samples: Vec<f64> = (0..40_000u64).map(|k| bridge_increments(9, 0, k, 0.0, dt, n)[0]).collect();
        let m = samples.len() as f64;
        let var = samples.iter().map(|v| v * v).sum::<f64>() / m;
        let expected = dt / n as f64 * (1.0 - 1.0 / n as f64);
        assert!((var / expected - 1.0).abs() < 0.03, "{var} vs {expected}");
    }
}
