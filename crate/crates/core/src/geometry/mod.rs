//! Set representations, exact measures and optimal-bubble geometry.

mod bubble;
pub mod io;
mod measure;
pub mod overlap;
mod params;
mod profile;
mod voxel;

pub use bubble::Bubble;
pub use measure::MeasureTriple;
pub use params::{omega, sphere_area, unit_cap_volume, CapillarityParams, QUAD_TOL};
pub use profile::{Piece, ProfileSet};
pub use voxel::{voxelize, voxelize_with_budget, Face, VoxelSet, DEFAULT_MAX_CELLS};


use crate::error::Result;

/// A set in the half-space in one of the two representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Profile { profile: ProfileSet, n: usize },
    Voxel(VoxelSet),
}

impl Shape {
    pub fn profile(profile: ProfileSet, n: usize) -> Self {
        Shape::Profile { profile, n }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Profile { n, .. } => *n,
            Shape::Voxel(v) => v.dim(),
        }
    }

    pub fn measures(&self) -> MeasureTriple {
        match self {
            Shape::Profile { profile, n } => profile.measures(*n),
            Shape::Voxel(v) => v.measures(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Shape::Profile { profile, n } => profile.volume(*n),
            Shape::Voxel(v) => v.volume(),
        }
    }

    /// Uniform scaling about the origin (exact for both representations).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Ok(match self {
            Shape::Profile { profile, n } => Shape::Profile { profile: profile.scaled(s)?, n: *n },
            Shape::Voxel(v) => Shape::Voxel(v.scaled(s)?),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Profile { .. } => "profile",
            Shape::Voxel(_) => "voxel",
        }
    }
}

impl From<VoxelSet> for Shape {
    fn from(v: VoxelSet) -> Self {
        Shape::Voxel(v)
    }
}
