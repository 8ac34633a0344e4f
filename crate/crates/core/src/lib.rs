//! Hyperdimensional encoding and data-driven refinement of layered
//! reasoning graphs.
//!
//! * [`hdc`]: real-valued hypervectors, seeded base vectors, projections.
//! * [`graph`]: layered DAG model, JSON I/O, DOT output.
//! * [`encoder`]: path-memory encoding of a graph into one hypervector.
//! * [`trainer`]: edit hypervector and decision head training.
//! * [`refiner`]: edge-contribution scoring and threshold refinement.
//! * [`synth`]: planted-structure tasks and recovery metrics.
//! * [`graphd`]: GrapHD-style baseline codec for general graphs.

pub mod data;
pub mod encoder;
pub mod graph;
pub mod graphd;
pub mod hdc;
pub mod refiner;
pub mod synth;
pub mod trainer;
