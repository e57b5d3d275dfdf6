//! Reductions from general sets to bounded, symmetric and finally Schwarz-symmetric sets.

mod normalize;
mod pipeline;
mod reflect;
mod schwarz;
mod truncate;

pub use normalize::normalize;
pub use pipeline::{run_pipeline, PipelineReport, Stage, StageRow};
pub use reflect::{
    bisect_reflect, bisect_reflect_at, median_plane, reduce_to_symmetric, Candidate, ReflectionStep, Side,
    SymmetryRecord,
};
pub use schwarz::schwarz_symmetrize;
pub use truncate::{truncate_and_rescale, AxisTruncation, TruncationRecord};

use crate::error::{domain, Result};
use crate::geometry::VoxelSet;

/// The coordinate `t` with `|E ∩ {x_axis < t}| = target`, exact for piecewise-constant slabs.
pub(crate) fn voxel_quantile(voxel: &VoxelSet, axis: usize, target: f64) -> Result<f64> {
    let areas = voxel.slab_areas(axis);
    let e = voxel.edges(axis);
    let total: f64 = areas.iter().zip(e.windows(2)).map(|(a, w)| a * (w[1] - w[0])).sum();
    if !(target >= 0.0 && target <= total) || total <= 0.0 {
        return Err(domain(format!("volume {target} outside [0, {total}]")));
    }
    let mut acc = 0.0;
    for (j, &a) in areas.iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        let slab = a * (e[j + 1] - e[j]);
        if acc + slab >= target {
            let t = e[j] + (target - acc) / a;
            return Ok(t.clamp(e[j], e[j + 1]));
        }
        acc += slab;
    }
    let last = areas.iter().rposition(|&a| a > 0.0).unwrap();
    Ok(e[last + 1])
}
