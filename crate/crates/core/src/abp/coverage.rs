use serde::{Deserialize, Serialize};

use super::{ContactSet, NeumannSolution};
use crate::error::{Error, Result};
use crate::geometry::CapillarityParams;

/// How well `∇u(Γ_u)` covers `K = {|ξ| < 1, ξ_2 > λ}` and the numbers of the area-formula chain
/// `|K| <= Σ_Γ det ∇²u h² <= Σ_E (Δu/2)² h²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covered_fraction: f64,
    pub xi_step: f64,
    /// `|K| = |B^λ|`.
    pub cap_volume: f64,
    /// `Σ_Γ det ∇²u h²` over contact cells with positive semidefinite Hessian.
    pub hessian_det_sum: f64,
    /// `Σ_E (Δu/2)² h²`.
    pub laplacian_power_sum: f64,
    /// `min_Γ (Δu/2)² - det ∇²u` over contact cells with positive semidefinite Hessian.
    pub amgm_min_slack: f64,
    pub contact_cells: usize,
    pub psd_cells: usize,
}

impl CoverageReport {
    /// Slacks of the two chain inequalities, `middle - |K|` and `right - middle`.
    pub fn chain_slacks(&self) -> (f64, f64) {
        (self.hessian_det_sum - self.cap_volume, self.laplacian_power_sum - self.hessian_det_sum)
    }
}

fn psd(hs: &[f64; 3]) -> bool {
    let [a, b, c] = *hs;
    a >= 0.0 && c >= 0.0 && a * c - b * b >= 0.0
}

/// Rasterizes the gradient image of the contact set on a `ξ` grid of spacing `xi_step`.
///
/// Each contact cell marks the bins whose centres lie within `xi_step/2` plus half the largest
/// gradient jump to a neighbouring cell, in the max norm, of its gradient.
pub fn gradient_coverage(
    sol: &NeumannSolution,
    contact: &ContactSet,
    params: &CapillarityParams,
    xi_step: f64,
) -> Result<CoverageReport> {
    if contact.is_empty() {
        return Err(Error::Invariant("the lower contact set is empty".into()));
    }
    let lambda = params.lambda;
    let d = xi_step;
    // bin centres ((i + 1/2) d - 1, λ + (j + 1/2) d)
    let nx = (2.0 / d).ceil() as usize;
    let ny = ((1.0 - lambda) / d).ceil() as usize;
    let centre = |i: usize, j: usize| [(i as f64 + 0.5) * d - 1.0, lambda + (j as f64 + 0.5) * d];
    let inside = |c: [f64; 2]| c[0] * c[0] + c[1] * c[1] < 1.0 && c[1] > lambda;
    let mut hit = vec![false; nx * ny];
    for k in contact.indices() {
        let g = sol.grad[k];
        let osc = sol
            .neighbours(k)
            .map(|m| (sol.grad[m][0] - g[0]).abs().max((sol.grad[m][1] - g[1]).abs()))
            .fold(0.0, f64::max);
        let r = 0.5 * d + 0.5 * osc;
        let i0 = (((g[0] - r + 1.0) / d - 0.5).ceil().max(0.0)) as usize;
        let i1 = (((g[0] + r + 1.0) / d - 0.5).floor()).min(nx as f64 - 1.0);
        let j0 = (((g[1] - r - lambda) / d - 0.5).ceil().max(0.0)) as usize;
        let j1 = (((g[1] + r - lambda) / d - 0.5).floor()).min(ny as f64 - 1.0);
        if i1 < 0.0 || j1 < 0.0 {
            continue;
        }
        for i in i0..=i1 as usize {
            for j in j0..=j1 as usize {
                hit[i * ny + j] = true;
            }
        }
    }
    let mut total = 0usize;
    let mut covered = 0usize;
    for i in 0..nx {
        for j in 0..ny {
            if inside(centre(i, j)) {
                total += 1;
                covered += hit[i * ny + j] as usize;
            }
        }
    }
    let h2 = sol.h * sol.h;
    let mut det_sum = 0.0;
    let mut amgm = f64::INFINITY;
    let mut psd_cells = 0;
    for k in contact.indices() {
        let hs = &sol.hessian[k];
        if psd(hs) {
            let det = hs[0] * hs[2] - hs[1] * hs[1];
            let lap = hs[0] + hs[2];
            det_sum += det * h2;
            amgm = amgm.min((0.5 * lap).powi(2) - det);
            psd_cells += 1;
        }
    }
    let lap_sum = sol.laplacian().iter().map(|l| (0.5 * l).powi(2) * h2).sum();
    Ok(CoverageReport {
        covered_fraction: covered as f64 / total.max(1) as f64,
        xi_step: d,
        cap_volume: params.cap_volume,
        hessian_det_sum: det_sum,
        laplacian_power_sum: lap_sum,
        amgm_min_slack: if psd_cells == 0 { 0.0 } else { amgm },
        contact_cells: contact.count(),
        psd_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abp::{lower_contact_set, solve_neumann, DEFAULT_SLACK};
    use crate::geometry::{voxelize, Bubble, ProfileSet};

    #[test]
    fn voxel_bubble_gradient_covers_cap() {
        for lambda in [0.0, 0.5] {
            let p = CapillarityParams::new(lambda, 2).unwrap();
            let prof = ProfileSet::from_bubble(&Bubble::unit(p), 2000).unwrap();
            let sol = solve_neumann(&voxelize(&prof, 2, 1.0 / 32.0).unwrap(), &p).unwrap();
            let contact = lower_contact_set(&sol, DEFAULT_SLACK);
            assert!(contact.fraction() > 0.95);
            let rep = gradient_coverage(&sol, &contact, &p, sol.h).unwrap();
            assert!(rep.covered_fraction >= 0.99, "{rep:?}");
            let (a, b) = rep.chain_slacks();
            assert!(a >= -1e-3 * p.cap_volume && b >= -1e-3 * p.cap_volume, "{rep:?}");
            assert!(rep.amgm_min_slack >= -1e-8);
        }
    }

    #[test]
    fn empty_contact_set_is_an_error() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let prof = ProfileSet::from_bubble(&Bubble::unit(p), 500).unwrap();
        let sol = solve_neumann(&voxelize(&prof, 2, 0.125).unwrap(), &p).unwrap();
        let none = ContactSet { mask: vec![false; sol.len()], slack: 0.0 };
        assert!(matches!(gradient_coverage(&sol, &none, &p, 0.1), Err(Error::Invariant(_))));
    }
}
