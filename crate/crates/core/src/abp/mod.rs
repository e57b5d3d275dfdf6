//! Discrete ABP engine on planar voxel domains: Neumann solve, lower contact set, gradient
//! coverage, restricted Legendre transform and the coupling envelope.

mod contact;
mod coverage;
mod legendre;
mod neumann;

pub use contact::{lower_contact_set, ContactSet, DEFAULT_SLACK};
pub use coverage::{gradient_coverage, CoverageReport};
pub use legendre::{
    cap_grid, coupling_residuals, k_envelope, restricted_legendre, ConjugateSamples, CouplingField, Envelope,
};
pub use neumann::{solve_neumann, NeumannSolution, SOLVE_TOL};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functionals::deficit;
use crate::geometry::{CapillarityParams, Shape, VoxelSet};

/// Everything the ABP engine reports for one domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbpReport {
    pub cells: usize,
    pub h: f64,
    pub rhs: f64,
    pub solver_residual: f64,
    pub solver_iterations: usize,
    pub compatibility_error: f64,
    pub contact_fraction: f64,
    pub coverage: CoverageReport,
    pub xi_step: f64,
    pub r1: f64,
    pub r2: f64,
    /// Resolution of `R2`: one ξ step per unit of relative boundary.
    pub r2_floor: f64,
    /// Deficit of the domain itself.
    pub deficit: f64,
}

/// Solve, extract the contact set, measure coverage (bins of size `h`) and the coupling
/// residuals with a conjugate grid of spacing `xi_step`.
pub fn analyze_domain(domain: &VoxelSet, params: &CapillarityParams, xi_step: f64) -> Result<(NeumannSolution, AbpReport)> {
    let sol = solve_neumann(domain, params)?;
    let contact = lower_contact_set(&sol, DEFAULT_SLACK);
    let coverage = gradient_coverage(&sol, &contact, params, sol.h)?;
    let conj = restricted_legendre(&sol, params, xi_step);
    let field = k_envelope(&sol, &conj);
    let (r1, r2) = coupling_residuals(&field);
    let report = AbpReport {
        cells: sol.len(),
        h: sol.h,
        rhs: sol.rhs,
        solver_residual: sol.residual,
        solver_iterations: sol.iterations,
        compatibility_error: sol.compatibility_error(),
        contact_fraction: contact.fraction(),
        coverage,
        xi_step,
        r1,
        r2,
        r2_floor: xi_step * domain.measures().rel_perimeter,
        deficit: deficit(&Shape::Voxel(domain.clone()), params)?,
    };
    Ok((sol, report))
}
