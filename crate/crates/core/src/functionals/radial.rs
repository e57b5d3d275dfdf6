use crate::error::{domain, Result};
use crate::geometry::{sphere_area, ProfileSet, Shape, VoxelSet};
use crate::quad;

/// Subdivisions per face direction in the voxel midpoint sum.
const FACE_SUBDIVISIONS: usize = 4;

/// `∫_{∂E ∩ {x_n > 0}} | |x - x0| - 1 | dH^{n-1}`.
pub fn radial_excess_integral(shape: &Shape, x0: &[f64]) -> Result<f64> {
    if x0.len() != shape.dim() {
        return Err(domain(format!("x0 has {} coordinates, the set lives in R^{}", x0.len(), shape.dim())));
    }
    match shape {
        Shape::Profile { profile, n } => profile_excess(profile, *n, x0),
        Shape::Voxel(v) => Ok(voxel_excess(v, x0)),
    }
}

fn profile_excess(profile: &ProfileSet, n: usize, x0: &[f64]) -> Result<f64> {
    let a = x0[n - 1];
    let d = x0[..n - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
    let gl = quad::gauss_legendre(48);
    let ring = sphere_area(n - 1);
    // mean of f(<ω, e_1>) over the unit sphere S^{n-2}
    let sphere_mean = |f: &dyn Fn(f64) -> f64| -> f64 {
        if d == 0.0 {
            f(0.0)
        } else if n == 2 {
            0.5 * (f(1.0) + f(-1.0))
        } else {
            let c = sphere_area(n - 2) / ring;
            c * gl.integrate(0.0, std::f64::consts::PI, |phi| f(phi.cos()) * phi.sin().powi(n as i32 - 3))
        }
    };
    let mut total = 0.0;
    for p in profile.pieces() {
        if p.r0 == 0.0 && p.r1 == 0.0 {
            continue;
        }
        let len = (p.t1 - p.t0).hypot(p.r1 - p.r0);
        let integrand = |s: f64| {
            let rho = p.r0 + (p.r1 - p.r0) * s;
            let t = p.t0 + (p.t1 - p.t0) * s;
            let dz = t - a;
            let mean = sphere_mean(&|c: f64| {
                let r2 = rho * rho + d * d - 2.0 * rho * d * c + dz * dz;
                (r2.max(0.0).sqrt() - 1.0).abs()
            });
            ring * rho.powi(n as i32 - 2) * len * mean
        };
        total += quad::integrate(integrand, 0.0, 1.0, 1e-10, 1e-8)?;
    }
    Ok(total)
}

fn voxel_excess(v: &VoxelSet, x0: &[f64]) -> f64 {
    let dim = v.dim();
    let q = FACE_SUBDIVISIONS;
    let sub = q.pow(dim as u32 - 1);
    v.boundary_faces(false)
        .iter()
        .map(|f| {
            let axes: Vec<usize> = (0..dim).filter(|&k| k != f.axis).collect();
            let mut acc = 0.0;
            for mut flat in 0..sub {
                let mut r2 = (f.lo[f.axis] - x0[f.axis]).powi(2);
                for &k in &axes {
                    let i = flat % q;
                    flat /= q;
                    let m = f.lo[k] + (f.hi[k] - f.lo[k]) * (i as f64 + 0.5) / q as f64;
                    r2 += (m - x0[k]).powi(2);
                }
                acc += (r2.sqrt() - 1.0).abs();
            }
            acc * f.area() / sub as f64
        })
        .sum()
}
