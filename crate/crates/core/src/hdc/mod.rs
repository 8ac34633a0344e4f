//! Real-valued hyperdimensional vector space.
//!
//! Bundling is component-wise addition, binding is component-wise
//! multiplication and similarity is the normalized dot product `(1/D) a·b`.
//! Base vectors are keyed pseudo-random draws from a single master seed.

mod projection;
mod space;
mod vector;

pub use projection::{ProjectionMap, PHI_LABEL};
pub use space::{substream, BaseStyle, HvSpace, DEFAULT_DIM};
pub use vector::{bind, bind_all, bundle, cosine, normalize, similarity, Hypervector};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HdcError {
    #[error("bundle of an empty sequence is undefined")]
    EmptyBundle,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
}
