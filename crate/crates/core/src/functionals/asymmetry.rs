use serde::{Deserialize, Serialize};

use super::perimeter::check_dim;
use super::search::{minimize_translation, SearchOptions};
use crate::error::{domain, Result};
use crate::geometry::overlap::{ball_overlap, box_ball_measure};
use crate::geometry::{omega, unit_cap_volume, Bubble, CapillarityParams, ProfileSet, Shape, VoxelSet};
use crate::quad;

/// An asymmetry value together with the wall point of the optimal bubble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub value: f64,
    pub center: Vec<f64>,
}

/// Volume of `B_r(c) ∩ {x_n > 0}` for a ball whose centre has height `c_n`.
pub fn half_space_ball_volume(n: usize, c_n: f64, r: f64) -> f64 {
    let cut = -c_n / r;
    if cut <= -1.0 {
        omega(n) * r.powi(n as i32)
    } else if cut >= 1.0 {
        0.0
    } else {
        r.powi(n as i32) * unit_cap_volume(cut, n).expect("cut lies in (-1, 1)")
    }
}

/// Occupied cells of a voxel set as flat `lo`/`hi` arrays.
#[derive(Debug, Clone)]
pub struct CellBoxes {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CellBoxes {
    pub fn of(v: &VoxelSet) -> Self {
        let dim = v.dim();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for flat in v.occupied_indices() {
            let (a, b) = v.cell_bounds(&v.multi_index(flat));
            lo.extend(a);
            hi.extend(b);
        }
        Self { dim, lo, hi }
    }

    pub fn from_boxes(dim: usize, boxes: &[(Vec<f64>, Vec<f64>)]) -> Self {
        let mut lo = Vec::with_capacity(dim * boxes.len());
        let mut hi = Vec::with_capacity(dim * boxes.len());
        for (a, b) in boxes {
            lo.extend_from_slice(a);
            hi.extend_from_slice(b);
        }
        Self { dim, lo, hi }
    }

    pub fn len(&self) -> usize {
        self.lo.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.len())
            .map(|i| (0..self.dim).map(|k| self.hi[i * self.dim + k] - self.lo[i * self.dim + k]).product::<f64>())
            .sum()
    }

    /// `|cells ∩ B_r(center)|`, summed in storage order.
    pub fn ball_intersection(&self, center: &[f64], r: f64) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..self.len() {
            let lo = &self.lo[i * d..(i + 1) * d];
            let hi = &self.hi[i * d..(i + 1) * d];
            acc += box_ball_measure(lo, hi, center, r);
        }
        acc
    }
}

/// `∫ |ρ^k - r^k|`-type integrand for a profile against a ball `B_R(c)` with centre offset `d`
/// from the axis, integrated in `t` piece by piece.
fn profile_ball_symdiff(profile: &ProfileSet, n: usize, center: &[f64], radius: f64) -> Result<f64> {
    let k = n - 1;
    let w = omega(k);
    let d = center[..k].iter().map(|x| x * x).sum::<f64>().sqrt();
    let c_n = center[k];
    let ball_r = |t: f64| (radius * radius - (t - c_n) * (t - c_n)).max(0.0).sqrt();
    let integrand = |t: f64, rho: f64| {
        let r = ball_r(t);
        if d == 0.0 {
            w * (rho.powi(k as i32) - r.powi(k as i32)).abs()
        } else {
            (w * rho.powi(k as i32) + w * r.powi(k as i32) - 2.0 * ball_overlap(k, rho, r, d)).max(0.0)
        }
    };
    let scale = profile.top().max(radius);
    let tol = 1e-15 * scale.powi(n as i32);
    let ball_lo = (c_n - radius).max(0.0);
    let ball_hi = c_n + radius;
    let mut total = 0.0;
    for p in profile.pieces().filter(|p| !p.is_step()) {
        let mut breaks = Vec::new();
        for b in [ball_lo, ball_hi] {
            if b > p.t0 && b < p.t1 {
                breaks.push(b);
            }
        }
        total += quad::integrate_split(|t| integrand(t, p.radius_at(t)), p.t0, p.t1, &breaks, tol, 0.0)?;
    }
    // ball above the profile's top and below its base cannot occur (base is t = 0)
    let top = profile.top();
    if ball_hi > top {
        let lo = top.max(ball_lo);
        total += quad::integrate(|t| w * ball_r(t).powi(k as i32), lo, ball_hi, tol, 0.0)?;
    }
    Ok(total)
}

/// `|E Δ (B_r(center) ∩ {x_n > 0})|` with `center` in full `n` coordinates.
pub fn symmetric_difference_ball(shape: &Shape, center: &[f64], radius: f64) -> Result<f64> {
    let n = shape.dim();
    if center.len() != n {
        return Err(domain(format!("ball centre needs {n} coordinates")));
    }
    match shape {
        Shape::Profile { profile, n } => profile_ball_symdiff(profile, *n, center, radius),
        Shape::Voxel(v) => {
            let boxes = CellBoxes::of(v);
            let inter = boxes.ball_intersection(center, radius);
            Ok((v.volume() + half_space_ball_volume(n, center[n - 1], radius) - 2.0 * inter).max(0.0))
        }
    }
}

/// `|E Δ B^λ(|E|, x)|` for a wall point `x`.
pub fn symmetric_difference_bubble(shape: &Shape, params: &CapillarityParams, wall_center: &[f64]) -> Result<f64> {
    check_dim(shape, params)?;
    let v = shape.volume();
    let b = Bubble::new(*params, v, wall_center.to_vec())?;
    symmetric_difference_ball(shape, &b.ball_center(), b.scale)
}

/// `|B^λ(v, x1) Δ B^λ(v, x2)|` for two wall points.
pub fn bubble_pair_symdiff(params: &CapillarityParams, volume: f64, x1: &[f64], x2: &[f64]) -> Result<f64> {
    let b = Bubble::centered(*params, volume)?;
    let d = x1.iter().zip(x2).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
    if d == 0.0 {
        return Ok(0.0);
    }
    let (s, c) = (b.scale, b.ball_center_height);
    let k = params.n - 1;
    let slice = |t: f64| {
        let r = (s * s - (t - c) * (t - c)).max(0.0).sqrt();
        ball_overlap(k, r, r, d)
    };
    let overlap = quad::integrate(slice, 0.0, c + s, 1e-14 * s.powi(params.n as i32), 1e-12)?;
    Ok((2.0 * (b.volume - overlap)).max(0.0))
}

fn require_volume(v: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(domain("asymmetry of a set with zero volume"));
    }
    Ok(())
}

/// Fraenkel asymmetry `α_λ(E) = min_x |E Δ B^λ(|E|, x)| / |E|` and the optimal wall point.
///
/// Profiles are centred on the axis, where concentric slices minimize each slice's
/// symmetric difference, so the optimum sits at the origin. Voxel sets are searched.
pub fn asymmetry_alpha(shape: &Shape, params: &CapillarityParams, options: &SearchOptions) -> Result<Asymmetry> {
    check_dim(shape, params)?;
    let n = params.n;
    let v = shape.volume();
    require_volume(v)?;
    match shape {
        Shape::Profile { .. } => {
            let center = vec![0.0; n - 1];
            let sd = symmetric_difference_bubble(shape, params, &center)?;
            Ok(Asymmetry { value: sd / v, center })
        }
        Shape::Voxel(vox) => voxel_alpha(vox, params, &vec![None; n - 1], options),
    }
}

/// `α_λ` with the bubble's wall point restricted: coordinate `k` is pinned to `fixed[k]` when it
/// is `Some`, and searched otherwise.
pub fn asymmetry_alpha_restricted(
    vox: &VoxelSet,
    params: &CapillarityParams,
    fixed: &[Option<f64>],
    options: &SearchOptions,
) -> Result<Asymmetry> {
    if vox.dim() != params.n || fixed.len() + 1 != params.n {
        return Err(domain(format!(
            "set of dimension {} with {} pinned wall coordinates does not match n = {}",
            vox.dim(),
            fixed.len(),
            params.n
        )));
    }
    require_volume(vox.volume())?;
    voxel_alpha(vox, params, fixed, options)
}

fn voxel_alpha(vox: &VoxelSet, params: &CapillarityParams, fixed: &[Option<f64>], options: &SearchOptions) -> Result<Asymmetry> {
    let v = vox.volume();
    let bubble = Bubble::centered(*params, v)?;
    let boxes = CellBoxes::of(vox);
    let s = bubble.scale;
    let ch = bubble.ball_center_height;
    let free: Vec<usize> = (0..fixed.len()).filter(|&k| fixed[k].is_none()).collect();
    let assemble = |x: &[f64]| {
        let mut c: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (j, &k) in free.iter().enumerate() {
            c[k] = x[j];
        }
        c
    };
    let objective = |x: &[f64]| {
        let mut c = assemble(x);
        c.push(ch);
        (2.0 * v - 2.0 * boxes.ball_intersection(&c, s)).max(0.0)
    };
    if free.is_empty() {
        let center = assemble(&[]);
        let value = objective(&[]) / v;
        return Ok(Asymmetry { value, center });
    }
    let centroid = vox.wall_centroid();
    let start: Vec<f64> = free.iter().map(|&k| centroid[k]).collect();
    let (x, best) = minimize_translation(&start, s, vox.min_edge(), options, objective)?;
    Ok(Asymmetry { value: best / v, center: assemble(&x) })
}

/// Symmetric difference of the trace with the bubble trace centred at `x`, normalized by the
/// bubble trace area.
pub fn trace_asymmetry_at(shape: &Shape, params: &CapillarityParams, wall_center: &[f64]) -> Result<f64> {
    check_dim(shape, params)?;
    let v = shape.volume();
    require_volume(v)?;
    let bubble = Bubble::new(*params, v, wall_center.to_vec())?;
    let rw = bubble.wetted_radius();
    let k = params.n - 1;
    let trace_area = omega(k) * rw.powi(k as i32);
    match shape {
        Shape::Profile { profile, .. } => {
            let d = wall_center.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r0 = profile.base_radius();
            let a = omega(k) * r0.powi(k as i32);
            Ok((a + trace_area - 2.0 * ball_overlap(k, r0, rw, d)).max(0.0) / trace_area)
        }
        Shape::Voxel(vox) => {
            let fp = CellBoxes::from_boxes(k, &vox.footprint());
            let inter = fp.ball_intersection(wall_center, rw);
            Ok((fp.total_measure() + trace_area - 2.0 * inter).max(0.0) / trace_area)
        }
    }
}

/// Trace asymmetry `β_λ(E)`: the bubble-trace analogue of `α_λ`.
///
/// A set with empty trace has `β = 1` (any disjoint disk is optimal).
pub fn asymmetry_beta(shape: &Shape, params: &CapillarityParams, options: &SearchOptions) -> Result<Asymmetry> {
    check_dim(shape, params)?;
    let n = params.n;
    let v = shape.volume();
    require_volume(v)?;
    match shape {
        Shape::Profile { profile, .. } => {
            let rw = params.scale_for_volume(v) * params.wetted_radius;
            let k = (n - 1) as i32;
            let value = (profile.base_radius().powi(k) - rw.powi(k)).abs() / rw.powi(k);
            Ok(Asymmetry { value, center: vec![0.0; n - 1] })
        }
        Shape::Voxel(vox) => {
            let footprint = vox.footprint();
            if footprint.is_empty() {
                return Ok(Asymmetry { value: 1.0, center: vox.wall_centroid() });
            }
            let k = n - 1;
            let fp = CellBoxes::from_boxes(k, &footprint);
            let fp_area = fp.total_measure();
            let s = params.scale_for_volume(v);
            let rw = s * params.wetted_radius;
            let trace_area = omega(k) * rw.powi(k as i32);
            let objective = |x: &[f64]| (fp_area + trace_area - 2.0 * fp.ball_intersection(x, rw)).max(0.0);
            let (center, best) =
                minimize_translation(&vox.wall_centroid(), s, vox.min_edge(), options, objective)?;
            Ok(Asymmetry { value: best / trace_area, center })
        }
    }
}
