use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{item_rng, symmetric_voxel_set};
use crate::error::{domain, Result};
use crate::functionals::{asymmetry_alpha, asymmetry_alpha_restricted, SearchOptions};
use crate::geometry::{CapillarityParams, Shape};

/// Slack on `restricted <= 3 · unrestricted` absorbing the translation search tolerance.
pub const FACTOR3_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Factor3Item {
    pub index: usize,
    pub axes: Vec<usize>,
    pub unrestricted: f64,
    pub restricted: f64,
}

impl Factor3Item {
    pub fn holds(&self) -> bool {
        self.restricted <= 3.0 * self.unrestricted + FACTOR3_TOL
    }

    pub fn ratio(&self) -> f64 {
        super::sweep::ratio(self.restricted, self.unrestricted)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Factor3Record {
    pub lambda: f64,
    pub n: usize,
    pub seed: u64,
    pub items: Vec<Factor3Item>,
    pub max_ratio: f64,
    pub violations: usize,
}

/// For random voxel sets symmetric across the wall-orthogonal planes through the origin,
/// compares the free asymmetry with the asymmetry over bubbles centred on those planes.
///
/// `n = 2` uses the plane `{x_1 = 0}`; `n = 3` draws one or both of `{x_1 = 0}`, `{x_2 = 0}`.
pub fn factor3_check(params: &CapillarityParams, trials: usize, seed: u64, options: &SearchOptions) -> Result<Factor3Record> {
    let n = params.n;
    if !(n == 2 || n == 3) {
        return Err(domain("factor-3 check needs a voxel dimension of 2 or 3"));
    }
    let items: Vec<Result<Factor3Item>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(seed, i);
            let axes: Vec<usize> = if n == 2 || rng.gen_bool(0.5) { vec![0] } else { vec![0, 1] };
            let v = symmetric_voxel_set(&mut rng, n, &axes);
            let free = asymmetry_alpha(&Shape::Voxel(v.clone()), params, options)?;
            let fixed: Vec<Option<f64>> = (0..n - 1).map(|k| axes.contains(&k).then_some(0.0)).collect();
            let pinned = asymmetry_alpha_restricted(&v, params, &fixed, options)?;
            Ok(Factor3Item { index: i, axes, unrestricted: free.value, restricted: pinned.value })
        })
        .collect();
    let items = items.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = items.iter().map(|it| it.ratio()).fold(0.0, f64::max);
    let violations = items.iter().filter(|it| !it.holds()).count();
    Ok(Factor3Record { lambda: params.lambda, n, seed, items, max_ratio, violations })
}
