//! Capillarity perimeter, deficit, asymmetries and the auxiliary integrals used in the
//! stability estimates.

mod asymmetry;
mod hausdorff;
mod perimeter;
mod radial;
mod report;
mod search;
mod slices;

pub use asymmetry::{
    asymmetry_alpha, asymmetry_alpha_restricted, asymmetry_beta, bubble_pair_symdiff, half_space_ball_volume, symmetric_difference_ball, symmetric_difference_bubble,
    trace_asymmetry_at, Asymmetry, CellBoxes,
};
pub use hausdorff::hausdorff_boundary_distance;
pub use perimeter::{
    capillarity_perimeter, capillarity_perimeter_flux, deficit, deficit_from_measures, perimeter_lower_bound,
    psi_concave, psi_inverse_lower, unit_trace_area,
};
pub use radial::radial_excess_integral;
pub use report::{evaluate, EvalReport};
pub use search::{minimize_translation, SearchOptions};
pub use slices::{slice_function, slice_lower_bound_residual, volume_below, SliceFunction};
