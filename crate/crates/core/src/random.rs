//! Seeded random finite spaces.
//!
//! Dimension is uniform in `[2, 12]`, masses are log-uniform in `[0.1, 10]`,
//! `φ` is a uniform self-map and `w` is complex with log-uniform modulus in
//! `[0.1, 10]`, uniform phase, and an exact zero with probability 1/5.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::DenseMatrix;
use crate::space::PointSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpaceConfig {
    pub min_dim: usize,
    pub max_dim: usize,
    pub zero_weight_prob: f64,
}

impl Default for RandomSpaceConfig {
    fn default() -> Self {
        RandomSpaceConfig { min_dim: 2, max_dim: 12, zero_weight_prob: 0.2 }
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

pub fn random_space(rng: &mut impl Rng, cfg: &RandomSpaceConfig) -> PointSpace {
    let n = rng.gen_range(cfg.min_dim..=cfg.max_dim);
    let labels = (0..n).map(|i| i.to_string()).collect();
    let mass = (0..n).map(|_| log_uniform(rng, 0.1, 10.0)).collect();
    let phi = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let weight = (0..n)
        .map(|_| {
            if rng.gen_bool(cfg.zero_weight_prob) {
                Complex64::new(0.0, 0.0)
            } else {
                let r = log_uniform(rng, 0.1, 10.0);
                Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            }
        })
        .collect();
    PointSpace::from_indices(labels, mass, phi, weight).expect("generated spaces are valid")
}

/// `count` spaces from one seeded stream; the same seed always yields the same corpus.
pub fn random_corpus(seed: u64, count: usize, cfg: &RandomSpaceConfig) -> Vec<PointSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_space(&mut rng, cfg)).collect()
}

/// Random complex vector with standard normal-ish components in `[-1, 1]²`.
pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Random Hermitian matrix with entries in the unit square.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    m
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible_and_in_range() {
        let a = random_corpus(7, 50, &RandomSpaceConfig::default());
        let b = random_corpus(7, 50, &RandomSpaceConfig::default());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_document(), y.to_document());
            assert!((2..=12).contains(&x.len()));
            assert!(x.masses().iter().all(|&m| (0.1..=10.0 + 1e-12).contains(&m)));
        }
        let zeros = a.iter().flat_map(|s| s.weights().iter()).filter(|w| w.norm() == 0.0).count();
        assert!(zeros > 0);
    }
}
