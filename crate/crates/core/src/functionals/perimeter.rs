use crate::error::{domain, Result};
use crate::geometry::{omega, CapillarityParams, MeasureTriple, Shape};

/// `P_λ(E) = P(E, {x_n > 0}) - λ H^{n-1}(∂*E ∩ {x_n = 0})`.
pub fn capillarity_perimeter(m: &MeasureTriple, lambda: f64) -> f64 {
    m.capillarity_perimeter(lambda)
}

/// `P_λ` as the flux of `1 - λ <e_n, ν>` through the relative boundary.
pub fn capillarity_perimeter_flux(shape: &Shape, lambda: f64) -> f64 {
    match shape {
        Shape::Profile { profile, n } => profile.flux_perimeter(*n, lambda),
        Shape::Voxel(v) => v.flux_perimeter(lambda),
    }
}

/// Deficit from precomputed measures.
pub fn deficit_from_measures(m: &MeasureTriple, params: &CapillarityParams) -> Result<f64> {
    if !(m.volume > 0.0) {
        return Err(domain("deficit of a set with zero volume"));
    }
    Ok(m.capillarity_perimeter(params.lambda) / params.reference_energy(m.volume) - 1.0)
}

/// `D_λ(E) = P_λ(E) / (n |B^λ|^{1/n} |E|^{(n-1)/n}) - 1`.
pub fn deficit(shape: &Shape, params: &CapillarityParams) -> Result<f64> {
    check_dim(shape, params)?;
    deficit_from_measures(&shape.measures(), params)
}

/// `ψ(t) = t^{(n-1)/n} + (1-t)^{(n-1)/n} - 1` on `[0, 1]`.
pub fn psi_concave(t: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("ψ is defined on [0, 1], got {t}")));
    }
    let e = (n as f64 - 1.0) / n as f64;
    Ok(t.powf(e) + (1.0 - t).powf(e) - 1.0)
}

/// Inverse of ψ on its increasing flank `[0, 1/2]`: the `g` with `ψ(g) = y`.
pub fn psi_inverse_lower(y: f64, n: usize) -> Result<f64> {
    let top = 2f64.powf(1.0 / n as f64) - 1.0;
    if !(0.0..=top).contains(&y) {
        return Err(domain(format!("ψ takes values in [0, {top}], got {y}")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi_concave(mid, n)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub(crate) fn check_dim(shape: &Shape, params: &CapillarityParams) -> Result<()> {
    if shape.dim() != params.n {
        return Err(domain(format!("set has dimension {}, parameters have n = {}", shape.dim(), params.n)));
    }
    Ok(())
}

/// Lower bound `(1-λ)/2 (P(E) + H^{n-1}(trace))` on `P_λ`.
pub fn perimeter_lower_bound(m: &MeasureTriple, lambda: f64) -> f64 {
    0.5 * (1.0 - lambda) * (m.rel_perimeter + m.wetted_area)
}

/// Wetted area of the unit bubble, used to normalize trace asymmetries.
pub fn unit_trace_area(params: &CapillarityParams) -> f64 {
    omega(params.n - 1) * params.wetted_radius.powi(params.n as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bubble, ProfileSet, VoxelSet};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn perimeter_examples() {
        assert_relative_eq!(capillarity_perimeter(&MeasureTriple::new(PI / 2.0, PI, 2.0), 0.0), PI);
        assert_relative_eq!(capillarity_perimeter(&MeasureTriple::new(1.0, 3.0, 1.0), 0.5), 2.5);
        let p = CapillarityParams::new(0.5, 2).unwrap();
        let m = Bubble::unit(p).measures();
        let e = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert_relative_eq!(capillarity_perimeter(&m, 0.5), e, max_relative = 1e-10);
        assert_relative_eq!(e, 2.0 * p.cap_volume, max_relative = 1e-10);
    }

    #[test]
    fn deficit_examples() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let sq = Shape::Voxel(VoxelSet::uniform(2, 1.0, &[0.0, 0.0], &[1, 1], vec![1]).unwrap());
        assert_relative_eq!(deficit(&sq, &p).unwrap(), 3.0 / (2.0 * PI).sqrt() - 1.0, max_relative = 1e-12);
        for &(l, n, v) in &[(0.3, 2, 2.0), (-0.7, 3, 0.4), (0.9, 4, 7.0)] {
            let p = CapillarityParams::new(l, n).unwrap();
            let m = Bubble::centered(p, v).unwrap().measures();
            assert!(deficit_from_measures(&m, &p).unwrap().abs() < 1e-8);
        }
        let empty = MeasureTriple::new(0.0, 0.0, 0.0);
        assert!(deficit_from_measures(&empty, &p).is_err());
        let cone = Shape::profile(ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap(), 2);
        assert!(deficit(&cone, &CapillarityParams::new(0.0, 3).unwrap()).is_err());
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi_concave(0.0, 3).unwrap(), 0.0);
        assert_eq!(psi_concave(1.0, 3).unwrap(), 0.0);
        for n in 2..=4 {
            assert_relative_eq!(psi_concave(0.5, n).unwrap(), 2f64.powf(1.0 / n as f64) - 1.0, max_relative = 1e-14);
        }
        assert_relative_eq!(psi_concave(0.25, 2).unwrap(), 0.5 + 0.75f64.sqrt() - 1.0, max_relative = 1e-14);
        assert!(psi_concave(1.5, 2).is_err());
        let g = psi_inverse_lower(0.1, 3).unwrap();
        assert_relative_eq!(psi_concave(g, 3).unwrap(), 0.1, max_relative = 1e-12);
    }
}
