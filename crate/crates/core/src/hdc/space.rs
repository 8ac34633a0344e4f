use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::vector::check_dims;
use super::{HdcError, Hypervector};

pub const DEFAULT_DIM: usize = 10_000;

/// Distribution of base (symbol) hypervector components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseStyle {
    /// Components uniformly in {-1, +1}.
    #[default]
    Bipolar,
    /// Components i.i.d. standard normal.
    Gaussian,
}

/// Builds the generator for the labeled sub-stream `label` of `seed`.
///
/// Every random quantity in the crate is drawn from one of these streams, so
/// a run is a pure function of its master seed.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// The hypervector space: dimension, master seed and the fixed permutation.
#[derive(Debug, Clone)]
pub struct HvSpace {
    dim: usize,
    master_seed: u64,
    base_style: BaseStyle,
    permutation: Vec<usize>,
    inverse: Vec<usize>,
}

impl HvSpace {
    pub fn new(dim: usize, master_seed: u64) -> Result<Self, HdcError> {
        Self::with_style(dim, master_seed, BaseStyle::Bipolar)
    }

    pub fn with_style(dim: usize, master_seed: u64, base_style: BaseStyle) -> Result<Self, HdcError> {
        if dim < 2 {
            return Err(HdcError::InvalidDimension(dim));
        }
        let mut permutation: Vec<usize> = (0..dim).collect();
        permutation.shuffle(&mut substream(master_seed, "perm"));
        let mut inverse = vec![0; dim];
        for (i, &p) in permutation.iter().enumerate() {
            inverse[p] = i;
        }
        Ok(Self {
            dim,
            master_seed,
            base_style,
            permutation,
            inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn base_style(&self) -> BaseStyle {
        self.base_style
    }

    /// Deterministic random hypervector keyed by `(master_seed, identifier)`.
    pub fn base_hv(&self, identifier: &str) -> Hypervector {
        let mut rng = substream(self.master_seed, identifier);
        let values = match self.base_style {
            BaseStyle::Bipolar => (0..self.dim)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
            BaseStyle::Gaussian => (0..self.dim).map(|_| rng.sample(StandardNormal)).collect(),
        };
        Hypervector::from_vec(values)
    }

    /// Applies the space's fixed permutation `steps` times; negative steps
    /// apply the inverse.
    pub fn permute(&self, h: &Hypervector, steps: i64) -> Result<Hypervector, HdcError> {
        check_dims(self.dim, h.dim())?;
        let table = if steps >= 0 { &self.permutation } else { &self.inverse };
        let mut current = h.as_slice().to_vec();
        let mut next = vec![0.0; self.dim];
        for _ in 0..steps.unsigned_abs() {
            for (slot, &src) in next.iter_mut().zip(table) {
                *slot = current[src];
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(Hypervector::from_vec(current))
    }
}
