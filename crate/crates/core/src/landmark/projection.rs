//! Random sign projections for sketching high-dimensional data.

use crate::matrix::DenseMatrix;
use crate::rng::{rng_from_seed, SeedRng};
use crate::{Error, Result};
use rand::Rng;

/// Sketch configuration: compression factor `gamma` in (0, 1] and the derived
/// sketch dimension `p_prime = round(gamma * p)`, clamped to `[1, p]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    pub gamma: f64,
    pub p_prime: usize,
    pub seed: u64,
}

impl ProjectionConfig {
    pub fn new(gamma: f64, p: usize, seed: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Gamma(gamma));
        }
        if p == 0 {
            return Err(Error::dim("ambient dimension is zero"));
        }
        let p_prime = ((gamma * p as f64).round() as usize).clamp(1, p);
        Ok(Self {
            gamma,
            p_prime,
            seed,
        })
    }
}

/// `p_prime x p` matrix with independent `+-1/sqrt(p_prime)` entries, each
/// sign with probability 1/2. Entries are drawn column by column, top to
/// bottom, from the seeded stream.
pub fn random_sign_matrix(cfg: &ProjectionConfig, p: usize) -> DenseMatrix {
    let mut rng = rng_from_seed(cfg.seed);
    sign_matrix_with_rng(cfg.p_prime, p, &mut rng)
}

pub(crate) fn sign_matrix_with_rng(p_prime: usize, p: usize, rng: &mut SeedRng) -> DenseMatrix {
    let inv = 1.0 / (p_prime as f64).sqrt();
    let mut h = DenseMatrix::zeros(p_prime, p);
    for j in 0..p {
        for v in h.col_mut(j) {
            *v = if rng.random::<bool>() { inv } else { -inv };
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rounds_and_clamps() {
        let c = ProjectionConfig::new(0.05, 200, 0).unwrap();
        assert_eq!(c.p_prime, 10);
        let tiny = ProjectionConfig::new(0.001, 20, 0).unwrap();
        assert_eq!(tiny.p_prime, 1);
        let full = ProjectionConfig::new(1.0, 7, 0).unwrap();
        assert_eq!(full.p_prime, 7);
        assert!(ProjectionConfig::new(0.0, 10, 0).is_err());
        assert!(ProjectionConfig::new(1.5, 10, 0).is_err());
    }

    #[test]
    fn entries_have_exact_magnitude() {
        let cfg = ProjectionConfig::new(0.5, 16, 3).unwrap();
        let h = random_sign_matrix(&cfg, 16);
        let inv = 1.0 / (cfg.p_prime as f64).sqrt();
        for &v in h.data() {
            assert!(v == inv || v == -inv);
        }
    }

    #[test]
    fn entry_mean_is_near_zero() {
        // 100 x 100 draw: CLT bound 3 / sqrt(1e4 * p')
        let cfg = ProjectionConfig::new(1.0, 100, 42).unwrap();
        let h = random_sign_matrix(&cfg, 100);
        let mean: f64 = h.data().iter().sum::<f64>() / 1e4;
        let bound = 3.0 / (1e4 * cfg.p_prime as f64).sqrt();
        assert!(mean.abs() <= bound, "mean {mean:.3e} exceeds {bound:.3e}");
    }

    #[test]
    fn sketch_preserves_norm_in_expectation() {
        // E ||Hx||^2 = ||x||^2; mean ratio over 1000 seeds within 5%
        let p = 40;
        let x: Vec<f64> = (0..p).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let mut ratio_sum = 0.0;
        for seed in 0..1000 {
            let cfg = ProjectionConfig::new(0.25, p, seed).unwrap();
            let h = random_sign_matrix(&cfg, p);
            let hx = h.matvec(&x);
            ratio_sum += hx.iter().map(|v| v * v).sum::<f64>() / x2;
        }
        let mean = ratio_sum / 1000.0;
        assert!((mean - 1.0).abs() <= 0.05, "mean ratio {mean}");
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let cfg = ProjectionConfig::new(0.3, 30, 9).unwrap();
        let a = random_sign_matrix(&cfg, 30);
        let b = random_sign_matrix(&cfg, 30);
        assert_eq!(a.data(), b.data());
    }
}
