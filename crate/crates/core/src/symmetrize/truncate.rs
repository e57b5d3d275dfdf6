use serde::{Deserialize, Serialize};

use super::voxel_quantile;
use crate::error::{Error, Result};
use crate::functionals::{deficit, psi_inverse_lower};
use crate::geometry::{omega, CapillarityParams, ProfileSet, Shape, VoxelSet};

/// Deficits at or below this are treated as zero and leave the set untouched.
const ZERO_DEFICIT: f64 = 1e-12;

/// One truncation along one axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisTruncation {
    pub axis: usize,
    pub deficit: f64,
    /// `n |B^λ| D / 2`, the slice area below which the set is cut.
    pub threshold: f64,
    pub t1: Option<f64>,
    pub t2: f64,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub removed_volume: f64,
    pub sigma: f64,
}

/// Bookkeeping of a bounded-set reduction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub axes: Vec<AxisTruncation>,
    /// Product of the per-axis rescalings.
    pub sigma: f64,
    pub deficit_in: f64,
    pub deficit_out: f64,
    pub volume_in: f64,
    pub volume_out: f64,
    /// Bounding box of the output.
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub noop: bool,
}

fn bounding_box(shape: &Shape) -> (Vec<f64>, Vec<f64>) {
    match shape {
        Shape::Profile { profile, n } => {
            let r = profile.max_radius();
            let mut lo = vec![-r; *n];
            let mut hi = vec![r; *n];
            lo[n - 1] = 0.0;
            hi[n - 1] = profile.top();
            (lo, hi)
        }
        Shape::Voxel(v) => v.occupied_bounds().unwrap_or_else(|| (vec![0.0; v.dim()], vec![0.0; v.dim()])),
    }
}

/// Profile truncated to `{x_n < tau}`.
fn profile_below(profile: &ProfileSet, tau: f64) -> Result<ProfileSet> {
    let (h, r) = (profile.heights(), profile.radii());
    let keep = h.partition_point(|&t| t < tau);
    let mut heights = h[..keep].to_vec();
    let mut radii = r[..keep].to_vec();
    let p = profile
        .pieces()
        .find(|p| !p.is_step() && p.t0 < tau && tau <= p.t1)
        .expect("tau lies inside the profile");
    let rho = p.radius_at(tau);
    heights.push(tau);
    radii.push(rho);
    if rho > 0.0 {
        heights.push(tau);
        radii.push(0.0);
    }
    ProfileSet::new(heights, radii)
}

/// `min { t >= from : v(t) <= threshold, mass remains above t }` for a profile.
fn profile_upper_cut(profile: &ProfileSet, n: usize, from: f64, threshold: f64) -> Option<f64> {
    let r_thr = (threshold / omega(n - 1)).powf(1.0 / (n - 1) as f64);
    let total = profile.volume(n);
    let top = profile.top();
    let mass_above = |t: f64| t < top && profile.volume_below(t, n) < total;
    for p in profile.pieces() {
        if p.t1 < from {
            continue;
        }
        if p.is_step() {
            if p.t0 >= from && p.r1 <= r_thr && mass_above(p.t0) {
                return Some(p.t0);
            }
            continue;
        }
        let start = p.t0.max(from);
        let r_start = p.radius_at(start);
        let t = if r_start <= r_thr {
            start
        } else if p.r1 < r_thr {
            // linear radius crosses the threshold inside the piece
            p.t0 + (r_thr - p.r0) / (p.r1 - p.r0) * p.len()
        } else {
            continue;
        };
        if t > 0.0 && mass_above(t) {
            return Some(t);
        }
    }
    None
}

/// Height `t` with `|E ∩ {x_n < t}| = target` on a profile, by bisection on the monotone volume.
fn profile_quantile(profile: &ProfileSet, n: usize, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, profile.top());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile.volume_below(mid, n) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `(t1, t2)` with `ψ(g(t1)) = 2D` on the lower flank and `g(t2) = 1 - g(t1)`.
fn flank_levels(d: f64, n: usize) -> Result<f64> {
    psi_inverse_lower(2.0 * d, n).map_err(|_| {
        Error::Precondition(format!("deficit {d} too large for the ψ level 2D to be attained"))
    })
}

fn truncate_wall_axis(v: &VoxelSet, axis: usize, params: &CapillarityParams, cap: f64) -> Result<(VoxelSet, AxisTruncation)> {
    let d = deficit(&Shape::Voxel(v.clone()), params)?;
    let n = params.n;
    let threshold = n as f64 * cap * d / 2.0;
    let g1 = flank_levels(d, n)?;
    let vol = v.volume();
    let t1 = voxel_quantile(v, axis, g1 * cap)?;
    let t2 = voxel_quantile(v, axis, (1.0 - g1) * cap)?;
    let g = v.with_plane(axis, t1).with_plane(axis, t2);
    let e = g.edges(axis).to_vec();
    let areas = g.slab_areas(axis);
    let first = areas.iter().position(|&x| x > 0.0).unwrap_or(0);
    let last = areas.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    let (a, b) = (e[first], e[last + 1]);
    // τ1: largest edge in (a, t1] whose left slab is thin
    let tau1 = (first + 1..e.len()).rev().find(|&j| e[j] <= t1 && e[j] > a && areas[j - 1] <= threshold);
    // τ2: smallest edge in [t2, b) whose right slab is thin
    let tau2 = (0..areas.len()).find(|&j| e[j] >= t2 && e[j] < b && areas[j] <= threshold);
    let j0 = tau1.unwrap_or(0);
    let j1 = tau2.unwrap_or(areas.len());
    let cut = g.select_slabs(axis, j0, j1).trimmed();
    let removed = vol - cut.volume();
    let sigma = (cap / cut.volume()).powf(1.0 / n as f64);
    let out = cut.scaled(sigma)?;
    let rec = AxisTruncation {
        axis,
        deficit: d,
        threshold,
        t1: Some(t1),
        t2,
        tau1: tau1.map(|j| e[j]),
        tau2: tau2.map(|j| e[j]),
        removed_volume: removed,
        sigma,
    };
    Ok((out, rec))
}

fn truncate_vertical(shape: &Shape, params: &CapillarityParams, cap: f64) -> Result<(Shape, AxisTruncation)> {
    let n = params.n;
    let d = deficit(shape, params)?;
    let threshold = n as f64 * cap * d / 2.0;
    let g1 = flank_levels(d, n)?;
    let vol = shape.volume();
    let (cut, t2, tau2) = match shape {
        Shape::Profile { profile, .. } => {
            let t2 = profile_quantile(profile, n, (1.0 - g1) * cap);
            match profile_upper_cut(profile, n, t2, threshold) {
                Some(tau) => (Shape::profile(profile_below(profile, tau)?, n), t2, Some(tau)),
                None => (shape.clone(), t2, None),
            }
        }
        Shape::Voxel(v) => {
            let axis = n - 1;
            let t2 = voxel_quantile(v, axis, (1.0 - g1) * cap)?;
            let g = v.with_plane(axis, t2);
            let e = g.edges(axis).to_vec();
            let areas = g.slab_areas(axis);
            let mut above: f64 = areas.iter().zip(e.windows(2)).map(|(a, w)| a * (w[1] - w[0])).sum();
            let mut found = None;
            for j in 0..areas.len() {
                if e[j] >= t2 && above > 0.0 && areas[j] <= threshold {
                    found = Some(j);
                    break;
                }
                above -= areas[j] * (e[j + 1] - e[j]);
            }
            match found {
                Some(j) => (Shape::Voxel(g.select_slabs(axis, 0, j).trimmed()), t2, Some(e[j])),
                None => (shape.clone(), t2, None),
            }
        }
    };
    let removed = vol - cut.volume();
    let sigma = (cap / cut.volume()).powf(1.0 / n as f64);
    let out = cut.scaled(sigma)?;
    let rec = AxisTruncation {
        axis: n - 1,
        deficit: d,
        threshold,
        t1: None,
        t2,
        tau1: None,
        tau2,
        removed_volume: removed,
        sigma,
    };
    Ok((out, rec))
}

/// Reduction to a bounded set: along each wall axis, the set is cut where its slice area first
/// drops below `n |B^λ| D / 2` outside the bulk `[t1, t2]` and rescaled back to volume `|B^λ|`;
/// then the same is done from above along the vertical axis.
///
/// Profile sets are axially symmetric, so only the vertical cut applies to them.
pub fn truncate_and_rescale(shape: &Shape, params: &CapillarityParams) -> Result<(Shape, TruncationRecord)> {
    let cap = params.cap_volume;
    let volume_in = shape.volume();
    if (volume_in - cap).abs() > 1e-6 * cap {
        return Err(Error::Precondition(format!("truncation needs volume |B^λ| = {cap}, got {volume_in}")));
    }
    let deficit_in = deficit(shape, params)?;
    let gate = params.small_deficit_gate();
    if deficit_in >= gate {
        return Err(Error::Precondition(format!("deficit {deficit_in} is not below the gate {gate}")));
    }
    if deficit_in <= ZERO_DEFICIT {
        let (box_lo, box_hi) = bounding_box(shape);
        return Ok((
            shape.clone(),
            TruncationRecord {
                axes: vec![],
                sigma: 1.0,
                deficit_in,
                deficit_out: deficit_in,
                volume_in,
                volume_out: volume_in,
                box_lo,
                box_hi,
                noop: true,
            },
        ));
    }
    let mut axes = Vec::new();
    let mut current = shape.clone();
    if let Shape::Voxel(_) = shape {
        for axis in 0..params.n - 1 {
            let Shape::Voxel(v) = &current else { unreachable!() };
            let (next, rec) = truncate_wall_axis(v, axis, params, cap)?;
            current = Shape::Voxel(next);
            axes.push(rec);
        }
    }
    let (out, rec) = truncate_vertical(&current, params, cap)?;
    axes.push(rec);
    let sigma = axes.iter().map(|a| a.sigma).product();
    let noop = axes.iter().all(|a| a.removed_volume == 0.0);
    let (box_lo, box_hi) = bounding_box(&out);
    let record = TruncationRecord {
        axes,
        sigma,
        deficit_in,
        deficit_out: deficit(&out, params)?,
        volume_in,
        volume_out: out.volume(),
        box_lo,
        box_hi,
        noop,
    };
    Ok((out, record))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::Bubble;
    use crate::symmetrize::normalize;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn bubble_nodes(p: CapillarityParams, nodes: usize) -> (Vec<f64>, Vec<f64>) {
        let prof = ProfileSet::from_bubble(&Bubble::unit(p), nodes).unwrap();
        (prof.heights().to_vec(), prof.radii().to_vec())
    }

    #[test]
    fn bubble_is_left_alone() {
        let p = CapillarityParams::new(0.3, 2).unwrap();
        let s = Shape::profile(ProfileSet::from_bubble(&Bubble::unit(p), 4000).unwrap(), 2);
        let s = normalize(&s, p.cap_volume).unwrap();
        let (out, rec) = truncate_and_rescale(&s, &p).unwrap();
        assert!((rec.sigma - 1.0).abs() < 1e-12, "{}", rec.sigma);
        assert_relative_eq!(out.volume(), p.cap_volume, max_relative = 1e-9);
    }

    #[test]
    fn remote_blob_is_removed() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let (mut h, mut r) = bubble_nodes(p, 2000);
        let top = *h.last().unwrap();
        // disk of area f |E| on the axis, 0.5 above the apex
        let f = 1e-3;
        let rb = (f / (1.0 - f) * p.cap_volume / PI).sqrt();
        let hc = top + 0.5 + rb;
        let m = 400;
        for k in 0..=m {
            let th = PI * k as f64 / m as f64;
            h.push(hc - rb * th.cos());
            r.push(if k == m { 0.0 } else { rb * th.sin() });
        }
        let raw = Shape::profile(ProfileSet::new(h, r).unwrap(), 2);
        let blob = raw.volume() - p.cap_volume;
        let frac = blob / raw.volume();
        let s = normalize(&raw, p.cap_volume).unwrap();
        let (out, rec) = truncate_and_rescale(&s, &p).unwrap();
        assert!(!rec.noop);
        let Shape::Profile { profile, .. } = &out else { panic!() };
        assert!(profile.top() < 1.01);
        assert!((rec.sigma.powi(2) * (1.0 - frac) - 1.0).abs() < 1e-4, "{} {}", rec.sigma, frac);
        assert_relative_eq!(out.volume(), p.cap_volume, max_relative = 1e-9);
    }

    #[test]
    fn thin_spike_is_clipped() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let (h, r) = bubble_nodes(p, 2000);
        let rs: f64 = 0.005;
        let ts = (1.0 - rs * rs).sqrt();
        let mut heights: Vec<f64> = Vec::new();
        let mut radii: Vec<f64> = Vec::new();
        for (t, rho) in h.iter().zip(&r) {
            if *t < ts {
                heights.push(*t);
                radii.push(*rho);
            }
        }
        heights.extend([ts, 1.1, 1.1]);
        radii.extend([rs, rs, 0.0]);
        let raw = Shape::profile(ProfileSet::new(heights, radii).unwrap(), 2);
        let s = normalize(&raw, p.cap_volume).unwrap();
        let d = crate::functionals::deficit(&s, &p).unwrap();
        assert!(d < p.small_deficit_gate());
        let (out, rec) = truncate_and_rescale(&s, &p).unwrap();
        let sc = (p.cap_volume / raw.volume()).sqrt();
        let tau = rec.axes[0].tau2.expect("spike must be cut");
        assert!(tau <= ts * sc, "{tau} vs {}", ts * sc);
        let Shape::Profile { profile, .. } = &out else { panic!() };
        assert!(profile.top() < ts * sc * rec.sigma + 1e-12);
    }

    #[test]
    fn large_deficit_is_refused() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let cone = Shape::profile(ProfileSet::new(vec![0.0, 3.0], vec![0.5, 0.0]).unwrap(), 2);
        let s = normalize(&cone, p.cap_volume).unwrap();
        assert!(matches!(truncate_and_rescale(&s, &p), Err(Error::Precondition(_))));
        let unnormalized = Shape::profile(ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap(), 2);
        assert!(matches!(truncate_and_rescale(&unnormalized, &p), Err(Error::Precondition(_))));
    }

    /// Rectangle of aspect close to the optimal one for λ = -1/2 with a one-cell blob far along
    /// the wall.
    pub fn rectangle_with_blob() -> (VoxelSet, CapillarityParams) {
        let p = CapillarityParams::new(-0.5, 2).unwrap();
        let (nx, ny) = (200, 121);
        let mut occ = vec![0u8; nx * ny];
        for i in 0..160 {
            for j in 0..120 {
                occ[i * ny + j] = 1;
            }
        }
        occ[195 * ny] = 1;
        let c = (p.cap_volume / 19200.0).sqrt();
        (VoxelSet::uniform(2, c, &[-80.0 * c, 0.0], &[nx, ny], occ).unwrap(), p)
    }

    #[test]
    fn wall_axis_blob_is_removed() {
        let (v, p) = rectangle_with_blob();
        let s = normalize(&Shape::Voxel(v), p.cap_volume).unwrap();
        let d = crate::functionals::deficit(&s, &p).unwrap();
        assert!(d < p.small_deficit_gate(), "{d}");
        let (out, rec) = truncate_and_rescale(&s, &p).unwrap();
        let Shape::Voxel(o) = &out else { panic!() };
        assert_eq!(o.component_count(), 1);
        let c2 = p.cap_volume / 19201.0;
        assert_relative_eq!(o.volume() / rec.sigma.powi(2), 19200.0 * c2, max_relative = 1e-12);
        let first = &rec.axes[0];
        assert!(first.tau1.is_none());
        assert!(first.tau2.is_some());
        assert_relative_eq!(rec.sigma.powi(2), 19201.0 / 19200.0, max_relative = 1e-12);
        assert!(rec.axes[1].tau2.is_none());
        assert!(rec.deficit_out < rec.deficit_in);
    }
}
