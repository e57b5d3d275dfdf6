use serde::{Deserialize, Serialize};

use super::perimeter::{check_dim, deficit_from_measures};
use crate::error::{Error, Result};
use crate::geometry::{omega, CapillarityParams, Shape};

/// Samples of `v_E(t) = H^{n-1}(E ∩ {x_n = t})` with quadrature weights.
///
/// `Σ weights[i] * values[i]` is the volume: Simpson on each linear profile piece (exact for
/// `n <= 4`) and one sample per row for voxel sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFunction {
    pub heights: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SliceFunction {
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }
}

pub fn slice_function(shape: &Shape) -> SliceFunction {
    match shape {
        Shape::Profile { profile, n } => {
            let w = omega(n - 1);
            let k = *n as i32 - 1;
            let mut out = SliceFunction { heights: vec![], values: vec![], weights: vec![] };
            let push = |t: f64, r: f64, wt: f64, out: &mut SliceFunction| {
                let v = w * r.powi(k);
                if let (Some(&lt), Some(&lv)) = (out.heights.last(), out.values.last()) {
                    if lt == t && lv == v {
                        *out.weights.last_mut().unwrap() += wt;
                        return;
                    }
                }
                out.heights.push(t);
                out.values.push(v);
                out.weights.push(wt);
            };
            for p in profile.pieces().filter(|p| !p.is_step()) {
                let l = p.len();
                push(p.t0, p.r0, l / 6.0, &mut out);
                push(0.5 * (p.t0 + p.t1), 0.5 * (p.r0 + p.r1), 4.0 * l / 6.0, &mut out);
                push(p.t1, p.r1, l / 6.0, &mut out);
            }
            out
        }
        Shape::Voxel(v) => {
            let axis = v.dim() - 1;
            let e = v.edges(axis);
            let areas = v.slab_areas(axis);
            SliceFunction {
                heights: e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
                values: areas,
                weights: e.windows(2).map(|w| w[1] - w[0]).collect(),
            }
        }
    }
}

/// `|E ∩ {x_n < t}|`.
pub fn volume_below(shape: &Shape, t: f64) -> f64 {
    match shape {
        Shape::Profile { profile, n } => profile.volume_below(t, *n),
        Shape::Voxel(v) => v.volume_below(v.dim() - 1, t),
    }
}

/// Heights at which the slice inequality is tested, with the slice area there.
fn test_heights(shape: &Shape) -> Vec<(f64, f64)> {
    match shape {
        Shape::Profile { profile, n } => profile
            .pieces()
            .filter(|p| !p.is_step())
            .flat_map(|p| {
                let l = p.len();
                [0.25, 0.5, 0.75].map(|f| {
                    let t = p.t0 + f * l;
                    (t, omega(n - 1) * p.radius_at(t).powi(*n as i32 - 1))
                })
            })
            .collect(),
        Shape::Voxel(v) => {
            let axis = v.dim() - 1;
            let e = v.edges(axis).to_vec();
            let areas = v.slab_areas(axis);
            e.windows(2)
                .zip(areas)
                .flat_map(|(w, a)| [(w[0], a), (0.5 * (w[0] + w[1]), a)])
                .collect()
        }
    }
}

/// Minimum over sampled heights of
/// `v_E(t) - ½ P_λ(B^λ) [ (ω_n / |B^λ|)^{1/n} (1 - |E ∩ {x_n < t}| / |B^λ|)^{(n-1)/n} - 1 - D_λ(E) ]`.
///
/// The set must already have volume `|B^λ|`. For voxel sets the slice area is constant on each
/// row while the bracket decreases with `t`, so rows are tested at their lower plane.
pub fn slice_lower_bound_residual(shape: &Shape, params: &CapillarityParams) -> Result<f64> {
    check_dim(shape, params)?;
    let m = shape.measures();
    let target = params.cap_volume;
    if (m.volume - target).abs() > 1e-6 * target {
        return Err(Error::Precondition(format!(
            "slice bound needs volume |B^λ| = {target}, got {}",
            m.volume
        )));
    }
    let n = params.n as f64;
    let d = deficit_from_measures(&m, params)?;
    let c = (omega(params.n) / target).powf(1.0 / n);
    let half_p = 0.5 * params.ref_energy;
    let mut worst = f64::INFINITY;
    for (t, v) in test_heights(shape) {
        let g = (volume_below(shape, t) / target).clamp(0.0, 1.0);
        let rhs = half_p * (c * (1.0 - g).powf((n - 1.0) / n) - 1.0 - d);
        worst = worst.min(v - rhs);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bubble, ProfileSet, VoxelSet};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn slice_examples() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let bub = Shape::profile(ProfileSet::from_bubble(&Bubble::unit(p), 1000).unwrap(), 2);
        let f = slice_function(&bub);
        assert_eq!(f.heights[0], 0.0);
        assert_relative_eq!(f.values[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(f.integral(), bub.volume(), max_relative = 1e-12);

        let cone = Shape::profile(ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap(), 2);
        let f = slice_function(&cone);
        assert_eq!(f.heights[1], 0.5);
        assert_relative_eq!(f.values[1], 1.0);

        let block = Shape::Voxel(VoxelSet::uniform(2, 1.0, &[0.0, 0.0], &[2, 2], vec![1; 4]).unwrap());
        let f = slice_function(&block);
        assert_eq!(f.values[0], 2.0);
        assert_eq!(f.integral(), 4.0);
    }

    #[test]
    fn simpson_is_exact_for_profiles() {
        let prof = ProfileSet::new(vec![0.0, 0.3, 0.3, 1.0, 1.7], vec![1.0, 1.4, 0.6, 0.9, 0.0]).unwrap();
        for n in 2..=4 {
            let s = Shape::profile(prof.clone(), n);
            assert_relative_eq!(slice_function(&s).integral(), s.volume(), max_relative = 1e-13);
        }
    }

    #[test]
    fn residual_on_bubble_is_nonnegative() {
        for &(l, n) in &[(0.0, 2), (0.5, 2), (-0.5, 3)] {
            let p = CapillarityParams::new(l, n).unwrap();
            let s = Shape::profile(ProfileSet::from_bubble(&Bubble::unit(p), 2000).unwrap(), n);
            assert!(slice_lower_bound_residual(&s, &p).unwrap() >= -1e-6);
        }
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let wrong = Shape::profile(ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap(), 2);
        assert!(matches!(slice_lower_bound_residual(&wrong, &p), Err(Error::Precondition(_))));
        let _ = PI;
    }
}
