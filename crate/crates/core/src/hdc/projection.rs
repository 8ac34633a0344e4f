use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use super::space::substream;
use super::{HdcError, Hypervector};

/// Stream label of the feature projection.
pub const PHI_LABEL: &str = "proj:phi";

/// Dense random linear map `R^m -> R^D` with i.i.d. `N(0, 1/m)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMap {
    matrix: Array2<f64>,
    seed: u64,
}

impl ProjectionMap {
    /// Draws a `dim x input_dim` map from the `label` sub-stream of `seed`.
    pub fn random(dim: usize, input_dim: usize, seed: u64, label: &str) -> Result<Self, HdcError> {
        if dim == 0 || input_dim == 0 {
            return Err(HdcError::InvalidDimension(dim.min(input_dim)));
        }
        let std = (1.0 / input_dim as f64).sqrt();
        let mut rng = substream(seed, label);
        let matrix = Array2::from_shape_simple_fn((dim, input_dim), || {
            std * rng.sample::<f64, _>(StandardNormal)
        });
        Ok(Self { matrix, seed })
    }

    /// The feature projection `phi` used for node and frame features.
    pub fn phi(dim: usize, input_dim: usize, seed: u64) -> Result<Self, HdcError> {
        Self::random(dim, input_dim, seed, PHI_LABEL)
    }

    pub fn from_matrix(matrix: Array2<f64>, seed: u64) -> Self {
        Self { matrix, seed }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn project(&self, x: &[f64]) -> Result<Hypervector, HdcError> {
        if x.len() != self.input_dim() {
            return Err(HdcError::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let out = self.matrix.dot(&ArrayView1::from(x));
        Ok(Hypervector::from_vec(out.to_vec()))
    }
}
