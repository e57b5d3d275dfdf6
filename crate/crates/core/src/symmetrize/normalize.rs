use crate::error::{domain, Result};
use crate::geometry::Shape;

/// Uniform scaling about the origin to volume `target`.
///
/// Voxel sets are rescaled by moving their grid planes, so the result is the exact image of the
/// input and the scale-invariant functionals do not drift.
pub fn normalize(shape: &Shape, target: f64) -> Result<Shape> {
    let v = shape.volume();
    if !(v > 0.0) {
        return Err(domain("cannot normalize a set with zero volume"));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(domain(format!("target volume must be positive, got {target}")));
    }
    shape.scaled((target / v).powf(1.0 / shape.dim() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::deficit;
    use crate::geometry::{Bubble, CapillarityParams, ProfileSet, VoxelSet};
    use approx::assert_relative_eq;

    #[test]
    fn normalize_examples() {
        let p = CapillarityParams::new(0.3, 3).unwrap();
        let b = Bubble::centered(p, 1.0).unwrap();
        let s = Shape::profile(ProfileSet::from_bubble(&b, 800).unwrap(), 3);
        let d0 = deficit(&s, &p).unwrap();
        let t = normalize(&s, p.cap_volume).unwrap();
        assert_relative_eq!(t.volume(), p.cap_volume, max_relative = 1e-12);
        assert!((deficit(&t, &p).unwrap() - d0).abs() < 1e-12);

        let cone = Shape::profile(ProfileSet::new(vec![0.0, 2.0], vec![1.0, 0.0]).unwrap(), 3);
        let c2 = normalize(&cone, 5.0).unwrap();
        assert!((deficit(&cone, &p).unwrap() - deficit(&c2, &p).unwrap()).abs() < 1e-9);

        let q = CapillarityParams::new(0.0, 2).unwrap();
        let sq = Shape::Voxel(VoxelSet::uniform(2, 0.1, &[0.0, 0.0], &[10, 10], vec![1; 100]).unwrap());
        let s2 = normalize(&sq, q.cap_volume).unwrap();
        assert_relative_eq!(s2.volume(), q.cap_volume, max_relative = 1e-12);
        assert!((deficit(&sq, &q).unwrap() - deficit(&s2, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_volume_is_rejected() {
        let empty = Shape::Voxel(VoxelSet::uniform(2, 1.0, &[0.0, 0.0], &[1, 1], vec![0]).unwrap());
        assert!(normalize(&empty, 1.0).is_err());
    }
}
