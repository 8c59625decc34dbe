//! Fundamental solutions of the wave equation on metric graphs with boundary
//! controls, and the eikonal algebra built from them.
//!
//! The pipeline runs hydra construction, then lattice closure and the family
//! partition of the reachable region, then the nested reachable projections
//! and eikonal blocks. Everything on the construction side is exact rational
//! arithmetic; floating point appears only in the numerical cross-checks.

pub mod fixtures;
pub mod graph;
pub mod hydra;
pub mod eikonal;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod rational;
pub mod sampled;
pub mod verify;
pub mod wave;
