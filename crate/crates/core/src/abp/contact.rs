use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::legendre::AffineMax;
use super::NeumannSolution;

/// Default multiple of `h` absorbed by the supporting-plane test.
pub const DEFAULT_SLACK: f64 = 2.0;

/// Cells where `u` admits a global affine minorant touching at the cell centre.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactSet {
    /// One flag per solution cell.
    pub mask: Vec<bool>,
    pub slack: f64,
}

impl ContactSet {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.mask.len().max(1) as f64
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k)
    }
}

/// `x ∈ Γ_u` iff `u(y) >= u(x) + <∇u(x), y - x> - slack (h + |y - x| h)` for every cell `y`.
pub fn lower_contact_set(sol: &NeumannSolution, slack: f64) -> ContactSet {
    let h = sol.h;
    let n = sol.len();
    let am = AffineMax::new(sol.centers.clone(), sol.u.clone());
    let mask = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = sol.centers[k];
            let g = sol.grad[k];
            let ux = sol.u[k];
            // the exact supporting plane already passes: u*(g) <= <g, x> - u(x) + slack h
            let (star, _) = am.query(&g);
            if star <= g[0] * x[0] + g[1] * x[1] - ux + slack * h {
                return true;
            }
            (0..n).all(|m| {
                let dx = sol.centers[m][0] - x[0];
                let dy = sol.centers[m][1] - x[1];
                let plane = ux + g[0] * dx + g[1] * dy;
                sol.u[m] >= plane - slack * (h + dx.hypot(dy) * h)
            })
        })
        .collect();
    ContactSet { mask, slack }
}
