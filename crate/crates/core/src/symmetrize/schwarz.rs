use crate::error::{validation, Result};
use crate::geometry::{omega, ProfileSet, VoxelSet};

/// Schwarz symmetrization about the vertical axis: each row `t` of the grid becomes the centred
/// `(n-1)`-ball of the same area, giving a stepped profile with the row sums of the input.
pub fn schwarz_symmetrize(voxel: &VoxelSet) -> Result<ProfileSet> {
    let n = voxel.dim();
    let axis = n - 1;
    let areas = voxel.slab_areas(axis);
    let edges = voxel.edges(axis);
    let last = areas.iter().rposition(|&a| a > 0.0).ok_or_else(|| validation("cannot symmetrize an empty set"))?;
    let w = omega(n - 1);
    let radius = |a: f64| (a / w).powf(1.0 / (n - 1) as f64);
    let mut heights = vec![edges[0]];
    let mut radii = vec![radius(areas[0])];
    for j in 0..=last {
        let r = radius(areas[j]);
        if j > 0 && r != *radii.last().unwrap() {
            heights.push(edges[j]);
            radii.push(r);
        }
        if j == last || radius(areas[j + 1]) != r {
            heights.push(edges[j + 1]);
            radii.push(r);
        }
    }
    heights.push(edges[last + 1]);
    radii.push(0.0);
    ProfileSet::new(heights, radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{voxelize, Bubble, CapillarityParams, Shape};
    use approx::assert_relative_eq;

    #[test]
    fn two_squares_become_a_centred_slab() {
        let v = VoxelSet::uniform(2, 1.0, &[3.0, 0.0], &[2, 1], vec![1, 1]).unwrap();
        let p = schwarz_symmetrize(&v).unwrap();
        assert_eq!(p.heights(), &[0.0, 1.0, 1.0]);
        assert_eq!(p.radii(), &[1.0, 1.0, 0.0]);
        let m = p.measures(2);
        assert_eq!(m.volume, 2.0);
        for lambda in [-0.5, 0.0, 0.7] {
            assert_relative_eq!(m.capillarity_perimeter(lambda), 4.0 - 2.0 * lambda, max_relative = 1e-14);
            assert_relative_eq!(v.measures().capillarity_perimeter(lambda), 4.0 - 2.0 * lambda);
        }
    }

    #[test]
    fn l_shape_recentres_rows() {
        // bottom row three cells, top row one cell at the left end
        let occ = vec![1, 1, 1, 0, 1, 0];
        let v = VoxelSet::uniform(2, 1.0, &[0.0, 0.0], &[3, 2], occ).unwrap();
        let p = schwarz_symmetrize(&v).unwrap();
        assert_eq!(p.volume(2), 4.0);
        assert_eq!(p.radii(), &[1.5, 1.5, 0.5, 0.5, 0.0]);
        for lambda in [-0.9, 0.0, 0.9] {
            assert!(p.measures(2).capillarity_perimeter(lambda) <= v.measures().capillarity_perimeter(lambda) + 1e-12);
        }
    }

    #[test]
    fn voxelized_bubble_stays_close() {
        let params = CapillarityParams::new(0.2, 3).unwrap();
        let b = Bubble::unit(params);
        let prof = ProfileSet::from_bubble(&b, 500).unwrap();
        let h = 0.05;
        let v = voxelize(&prof, 3, h).unwrap();
        let s = schwarz_symmetrize(&v).unwrap();
        assert_relative_eq!(s.volume(3), v.volume(), max_relative = 1e-12);
        let sym = Shape::profile(s.clone(), 3);
        assert!(sym.measures().capillarity_perimeter(0.2) <= v.measures().capillarity_perimeter(0.2) + 1e-9);
        for t in [0.1, 0.4, 0.8] {
            assert!((s.radius_at(t) - b.slice_radius(t)).abs() < 2.0 * h);
        }
    }
}
