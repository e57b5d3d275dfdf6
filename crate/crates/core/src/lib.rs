//! Numerical laboratory for the capillarity isoperimetric problem in a half-space.
//!
//! Sets live in `{x_n > 0}` and are represented either by a slice-radius profile
//! (Schwarz-symmetric sets, high accuracy) or by a union of grid cells (general sets,
//! exact polyhedral measures). On top of the measures the crate provides the capillarity
//! perimeter, deficit and asymmetries, the symmetrization reductions, a discrete ABP
//! engine and experiment harnesses.

pub mod abp;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod quad;
pub mod symmetrize;

pub use error::{Error, Result};
pub use geometry::{Bubble, CapillarityParams, MeasureTriple, ProfileSet, Shape, VoxelSet};
