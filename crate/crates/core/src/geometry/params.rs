use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quad;

/// Quadrature tolerance used for all bubble reference integrals.
pub const QUAD_TOL: f64 = 1e-13;

/// Volume of the unit ball in `R^k`.
pub fn omega(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / k as f64 * omega(k - 2),
    }
}

/// `|S^{k-1}| = k * omega(k)`, the area of the unit sphere in `R^k`.
pub fn sphere_area(k: usize) -> f64 {
    k as f64 * omega(k)
}

fn check_lambda_n(lambda: f64, n: usize) -> Result<()> {
    if !(lambda > -1.0 && lambda < 1.0) {
        return Err(domain(format!("lambda must lie in (-1, 1), got {lambda}")));
    }
    if n < 2 {
        return Err(domain(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

/// Volume of the unit cap `{x in B_1 : x_n > lambda}`.
///
/// Integrated in the angle variable `t = sin(theta)`, where the integrand
/// `cos^n(theta)` is smooth up to both endpoints.
pub fn unit_cap_volume(lambda: f64, n: usize) -> Result<f64> {
    check_lambda_n(lambda, n)?;
    let w = omega(n - 1);
    let i = quad::integrate(
        |theta: f64| theta.cos().powi(n as i32),
        lambda.asin(),
        PI / 2.0,
        QUAD_TOL,
        QUAD_TOL,
    )?;
    Ok(w * i)
}

/// Relative perimeter of the unit cap, `(n-1) omega_{n-1} ∫_lambda^1 (1-t^2)^{(n-3)/2} dt`.
pub(crate) fn unit_cap_rel_perimeter(lambda: f64, n: usize) -> Result<f64> {
    check_lambda_n(lambda, n)?;
    let i = quad::integrate(
        |theta: f64| theta.cos().powi(n as i32 - 2),
        lambda.asin(),
        PI / 2.0,
        QUAD_TOL,
        QUAD_TOL,
    )?;
    Ok((n - 1) as f64 * omega(n - 1) * i)
}

/// The capillarity parameters `(lambda, n)` and reference constants of the unit bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapillarityParams {
    pub lambda: f64,
    pub n: usize,
    pub cap_volume: f64,
    pub wetted_radius: f64,
    pub r_small: f64,
    pub r_big: f64,
    pub ref_energy: f64,
    pub(crate) cap_rel_perimeter: f64,
}

impl CapillarityParams {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        check_lambda_n(lambda, n)?;
        let cap_volume = unit_cap_volume(lambda, n)?;
        let cap_rel_perimeter = unit_cap_rel_perimeter(lambda, n)?;
        let wetted_radius = (1.0 - lambda * lambda).sqrt();
        let a = wetted_radius;
        let b = 1.0 - lambda;
        Ok(Self {
            lambda,
            n,
            cap_volume,
            wetted_radius,
            r_small: a.min(b),
            r_big: a.max(b),
            ref_energy: n as f64 * cap_volume,
            cap_rel_perimeter,
        })
    }

    /// Unit-bubble wetted area `omega_{n-1} (1 - lambda^2)^{(n-1)/2}`.
    pub fn cap_wetted_area(&self) -> f64 {
        omega(self.n - 1) * self.wetted_radius.powi(self.n as i32 - 1)
    }

    /// Isoperimetric reference energy `n |B^λ|^{1/n} v^{(n-1)/n}` of the bubble with volume `v`.
    pub fn reference_energy(&self, volume: f64) -> f64 {
        let n = self.n as f64;
        n * self.cap_volume.powf(1.0 / n) * volume.powf((n - 1.0) / n)
    }

    /// Length scale of the bubble with volume `v`.
    pub fn scale_for_volume(&self, volume: f64) -> f64 {
        (volume / self.cap_volume).powf(1.0 / self.n as f64)
    }

    /// Deficit threshold below which the truncation to bounded sets applies.
    pub fn small_deficit_gate(&self) -> f64 {
        (2f64.powf(1.0 / self.n as f64) - 1.0) / 4.0
    }
}
