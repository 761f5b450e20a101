//! Random test functions `f̂(k) = Z_k λ^tr_k` with `Z_k ~ Unif[−1, 1]`.
//!
//! The true weights are `w^tr_ℓ = 1/L(ℓ)²` for a random permutation `L` of
//! `1..=d`, `s^tr_j = j^{-4}` and `Γ^tr ≡ 1`. Each `Z_k` is drawn from a
//! generator seeded with a hash of `(seed, k)`, so values do not depend on
//! the order in which wavenumbers are queried.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::spaces::CoefficientSource;
use crate::weights::{Smoothness, WeightModel};

pub const TRUE_SMOOTHNESS: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct RandomPosdFunction {
    seed: u64,
    permutation: Vec<usize>,
    truth: WeightModel,
}

impl RandomPosdFunction {
    pub fn new(seed: u64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let mut permutation: Vec<usize> = (1..=d).collect();
        permutation.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let w = permutation.iter().map(|&l| 1.0 / (l * l) as f64).collect();
        let truth = WeightModel::product(w, Smoothness::algebraic(TRUE_SMOOTHNESS))?;
        Ok(RandomPosdFunction { seed, permutation, truth })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `L(1), …, L(d)`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// The weights `λ^tr`.
    pub fn truth(&self) -> &WeightModel {
        &self.truth
    }

    /// `Z_k`.
    pub fn z(&self, k: &[u32]) -> f64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        for &x in k {
            h.update(x.to_le_bytes());
        }
        let key: [u8; 32] = h.finalize().into();
        ChaCha8Rng::from_seed(key).random_range(-1.0..=1.0)
    }
}

impl CoefficientSource for RandomPosdFunction {
    fn dim(&self) -> usize {
        self.truth.dim()
    }

    fn coefficient(&self, k: &[u32]) -> f64 {
        self.z(k) * self.truth.lambda_unchecked(k)
    }
}
