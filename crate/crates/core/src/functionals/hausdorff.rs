use rayon::prelude::*;
use rstar::{Point, RTree};

use crate::error::{domain, Result};
use crate::geometry::{Bubble, ProfileSet, Shape, VoxelSet};

/// Largest distance from a query point to its nearest neighbour in `cloud`.
fn max_nearest<const K: usize>(cloud: &[[f64; K]], queries: &[[f64; K]]) -> f64
where
    [f64; K]: Point<Scalar = f64>,
{
    let tree = RTree::bulk_load(cloud.to_vec());
    queries
        .par_iter()
        .map(|q| {
            let p = tree.nearest_neighbor(q).expect("cloud is not empty");
            p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Points of the bubble's meridian arc, `(r, t)` from the rim to the apex.
fn meridian_arc(bubble: &Bubble, delta: f64) -> Vec<[f64; 2]> {
    let phi0 = bubble.params.lambda.asin();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let m = ((half_pi - phi0) * bubble.scale / delta).ceil().max(1.0) as usize;
    (0..=m)
        .map(|i| {
            let phi = phi0 + (half_pi - phi0) * i as f64 / m as f64;
            [bubble.scale * phi.cos(), bubble.ball_center_height + bubble.scale * phi.sin()]
        })
        .collect()
}

fn profile_samples(profile: &ProfileSet, delta: f64) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    for p in profile.pieces() {
        if !p.is_step() && p.r0 == 0.0 && p.r1 == 0.0 {
            continue;
        }
        let len = (p.t1 - p.t0).hypot(p.r1 - p.r0);
        let m = (len / delta).ceil().max(1.0) as usize;
        for i in 0..=m {
            let s = i as f64 / m as f64;
            pts.push([p.r0 + (p.r1 - p.r0) * s, p.t0 + (p.t1 - p.t0) * s]);
        }
    }
    pts
}

fn profile_hausdorff(profile: &ProfileSet, n: usize, bubble: &Bubble, delta: f64) -> Result<f64> {
    if bubble.center.iter().any(|&c| c != 0.0) {
        return Err(domain("profile distances need a bubble centred on the symmetry axis"));
    }
    let samples = profile_samples(profile, delta);
    if samples.is_empty() {
        return Err(domain("profile has an empty relative boundary"));
    }
    let mut x = vec![0.0; n];
    let to_bubble = samples
        .iter()
        .map(|p| {
            x[0] = p[0];
            x[n - 1] = p[1];
            bubble.boundary_distance(&x)
        })
        .fold(0.0, f64::max);
    let arc = meridian_arc(bubble, delta);
    Ok(to_bubble.max(max_nearest(&samples, &arc)))
}

fn face_samples<const K: usize>(v: &VoxelSet) -> Vec<[f64; K]> {
    let mut pts = Vec::new();
    for f in v.boundary_faces(false) {
        let axes: Vec<usize> = (0..K).filter(|&k| k != f.axis).collect();
        let counts: Vec<usize> = axes
            .iter()
            .map(|&k| {
                let len = f.hi[k] - f.lo[k];
                // spacing at most half the cell edge
                ((len / (0.5 * v.max_edge())).ceil() as usize).max(2)
            })
            .collect();
        let total: usize = counts.iter().map(|c| c + 1).product();
        for mut flat in 0..total {
            let mut p = [0.0; K];
            p[f.axis] = f.lo[f.axis];
            for (j, &k) in axes.iter().enumerate() {
                let i = flat % (counts[j] + 1);
                flat /= counts[j] + 1;
                p[k] = f.lo[k] + (f.hi[k] - f.lo[k]) * i as f64 / counts[j] as f64;
            }
            pts.push(p);
        }
    }
    pts
}

fn cap_samples<const K: usize>(bubble: &Bubble, delta: f64) -> Vec<[f64; K]> {
    let s = bubble.scale;
    let c = bubble.ball_center();
    let mut pts = Vec::new();
    // polar angle from the top of the ball down to the rim, cos(theta_max) = lambda
    let theta_max = bubble.params.lambda.clamp(-1.0, 1.0).acos();
    let rings = ((theta_max * s / delta).ceil() as usize).max(1);
    match K {
        2 => {
            for side in [-1.0, 1.0] {
                for i in 0..=rings {
                    let th = theta_max * i as f64 / rings as f64;
                    let mut p = [0.0; K];
                    p[0] = c[0] + side * s * th.sin();
                    p[1] = c[1] + s * th.cos();
                    pts.push(p);
                }
            }
        }
        3 => {
            for i in 0..=rings {
                let th = theta_max * i as f64 / rings as f64;
                let ring_r = s * th.sin();
                let m = ((2.0 * std::f64::consts::PI * ring_r / delta).ceil() as usize).max(1);
                for j in 0..m {
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    let mut p = [0.0; K];
                    p[0] = c[0] + ring_r * ph.cos();
                    p[1] = c[1] + ring_r * ph.sin();
                    p[2] = c[2] + s * th.cos();
                    pts.push(p);
                }
            }
        }
        _ => unreachable!("voxel sets have dimension 2 or 3"),
    }
    pts
}

fn voxel_hausdorff_k<const K: usize>(v: &VoxelSet, bubble: &Bubble) -> Result<f64>
where
    [f64; K]: Point<Scalar = f64>,
{
    let samples: Vec<[f64; K]> = face_samples(v);
    if samples.is_empty() {
        return Err(domain("voxel set has an empty relative boundary"));
    }
    let to_bubble = samples
        .par_iter()
        .map(|p| bubble.boundary_distance(p))
        .reduce(|| 0.0, f64::max);
    let cap: Vec<[f64; K]> = cap_samples(bubble, 0.5 * v.max_edge());
    Ok(to_bubble.max(max_nearest(&samples, &cap)))
}

/// Two-sided Hausdorff distance between the closures of the relative boundaries of `shape` and
/// `bubble`, from dense boundary samples.
///
/// Profiles are sampled along the generatrix at spacing `bubble.scale * 5e-4`; voxel faces and
/// the spherical cap at half the largest cell edge.
pub fn hausdorff_boundary_distance(shape: &Shape, bubble: &Bubble) -> Result<f64> {
    if shape.dim() != bubble.dim() {
        return Err(domain("dimension mismatch between set and bubble"));
    }
    match shape {
        Shape::Profile { profile, n } => profile_hausdorff(profile, *n, bubble, bubble.scale * 5e-4),
        Shape::Voxel(v) => match v.dim() {
            2 => voxel_hausdorff_k::<2>(v, bubble),
            _ => voxel_hausdorff_k::<3>(v, bubble),
        },
    }
}
