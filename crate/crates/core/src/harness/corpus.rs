//! Seeded random set generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::perturb::{bubble_radial_graph, PerturbationMode};
use crate::geometry::{CapillarityParams, ProfileSet, VoxelSet};

/// Independent generator for item `index` of a corpus, so items can be built in parallel.
pub fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Union of 1 to 5 random boxes and ellipsoids on a uniform grid of at most 24 cells per axis.
/// Some sets float above the wall and some are disconnected.
pub fn random_voxel_set(rng: &mut ChaCha8Rng, n: usize) -> VoxelSet {
    let cells: usize = if n == 2 { rng.gen_range(6..=24) } else { rng.gen_range(4..=12) };
    let h = rng.gen_range(0.05..0.3);
    let width = cells as f64 * h;
    let shape = vec![cells; n];
    let mut origin = vec![-0.5 * width; n];
    origin[n - 1] = 0.0;
    let blobs: Vec<(bool, Vec<f64>, Vec<f64>)> = (0..rng.gen_range(1..=5))
        .map(|_| {
            let round = rng.gen_bool(0.5);
            let c: Vec<f64> = (0..n)
                .map(|k| if k == n - 1 { rng.gen_range(0.0..0.7 * width) } else { rng.gen_range(-0.4 * width..0.4 * width) })
                .collect();
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.6 * h..0.4 * width)).collect();
            (round, c, r)
        })
        .collect();
    let inside = |x: &[f64]| {
        blobs.iter().any(|(round, c, r)| {
            if *round {
                x.iter().zip(c).zip(r).map(|((x, c), r)| ((x - c) / r).powi(2)).sum::<f64>() <= 1.0
            } else {
                x.iter().zip(c).zip(r).all(|((x, c), r)| (x - c).abs() <= *r)
            }
        })
    };
    let v = VoxelSet::rasterize(n, h, &origin, &shape, usize::MAX, inside).expect("grid is small");
    if v.is_empty() {
        // keep one cell so every corpus member has positive volume
        let mut occ = v.occupancy().to_vec();
        occ[v.flat_index(&vec![cells / 2; n])] = 1;
        VoxelSet::new(v.all_edges().to_vec(), occ).expect("same grid")
    } else {
        v
    }
}

/// Random profile with 3 to 40 nodes and occasional radius jumps; half start with `ρ(0) = 0`
/// in one node in four.
pub fn random_profile_set(rng: &mut ChaCha8Rng) -> ProfileSet {
    let m = rng.gen_range(3..=40);
    let mut heights = vec![0.0];
    let mut radii = vec![if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.05..2.0) }];
    let mut t = 0.0;
    for k in 1..m {
        let step = k >= 2 && heights[k - 1] != heights[k - 2] && rng.gen_bool(0.15);
        if !step {
            t += rng.gen_range(0.01..0.5);
        }
        heights.push(t);
        radii.push(if k == m - 1 { 0.0 } else { rng.gen_range(0.0..2.0) });
    }
    if radii.iter().all(|&r| r == 0.0) {
        radii[0] = 1.0;
    }
    ProfileSet::new(heights, radii).expect("valid by construction")
}

/// Bubble perturbed by a random combination of modes 2..=5 and the wetted bump, each with
/// amplitude at most `max_amp`, rescaled to volume `|B^λ|`.
pub fn near_bubble_profile(rng: &mut ChaCha8Rng, params: &CapillarityParams, max_amp: f64, nodes: usize) -> ProfileSet {
    let modes = [
        PerturbationMode::Legendre(2),
        PerturbationMode::Legendre(3),
        PerturbationMode::Legendre(4),
        PerturbationMode::Legendre(5),
        PerturbationMode::WettedBump,
    ];
    let amps: Vec<f64> = modes.iter().map(|_| rng.gen_range(-max_amp..max_amp)).collect();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let m = nodes.max(8);
    let mut heights = Vec::with_capacity(m);
    let mut radii = Vec::with_capacity(m);
    for k in 0..m {
        let theta = half_pi * (1.0 - k as f64 / (m - 1) as f64);
        let c = if k == 0 { 0.0 } else { theta.cos() };
        let bump: f64 = modes.iter().zip(&amps).map(|(md, a)| a * md.eval(c)).sum();
        let r = bubble_radial_graph(params.lambda, c) * (1.0 + bump).max(0.05);
        let (t, rho) = if k == 0 { (0.0, r) } else if k == m - 1 { (r, 0.0) } else { (r * c, r * theta.sin()) };
        heights.push(t);
        radii.push(rho);
    }
    // small amplitudes keep the graph monotone; enforce it so large ones still produce a set
    for k in 1..m {
        if heights[k] <= heights[k - 1] {
            heights[k] = heights[k - 1] + 1e-9;
        }
    }
    let p = ProfileSet::new(heights, radii).expect("monotone by construction");
    let s = (params.cap_volume / p.volume(params.n)).powf(1.0 / params.n as f64);
    p.scaled(s).expect("positive scale")
}

/// Kinds of members in the mixed corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    NearBubble,
    DetachedDroplet,
    TallColumn,
    Cone,
    Random,
}

/// A set far from or near the bubble, rescaled to volume `|B^λ|`.
pub fn mixed_member(rng: &mut ChaCha8Rng, params: &CapillarityParams, nodes: usize) -> (CorpusKind, ProfileSet) {
    let kind = match rng.gen_range(0..10) {
        0..=3 => CorpusKind::NearBubble,
        4 => CorpusKind::DetachedDroplet,
        5 => CorpusKind::TallColumn,
        6 => CorpusKind::Cone,
        _ => CorpusKind::Random,
    };
    let p = match kind {
        CorpusKind::NearBubble => {
            let amp = 10f64.powf(rng.gen_range(-3.0..-0.7));
            return (kind, near_bubble_profile(rng, params, amp, nodes));
        }
        CorpusKind::DetachedDroplet => {
            // a ball resting on the wall at one point, ρ(0) = 0
            let m = 200;
            let (h, r): (Vec<f64>, Vec<f64>) = (0..m)
                .map(|k| {
                    let th = std::f64::consts::PI * (1.0 - k as f64 / (m - 1) as f64);
                    let t = 1.0 + th.cos();
                    let rho = if k == 0 || k == m - 1 { 0.0 } else { th.sin() };
                    (if k == 0 { 0.0 } else { t }, rho)
                })
                .unzip();
            ProfileSet::new(h, r).expect("ball profile")
        }
        CorpusKind::TallColumn => {
            let w = rng.gen_range(0.05..0.3);
            let top = rng.gen_range(2.0..6.0);
            ProfileSet::new(vec![0.0, top, top], vec![w, w, 0.0]).expect("column")
        }
        CorpusKind::Cone => {
            let base = rng.gen_range(0.3..3.0);
            ProfileSet::new(vec![0.0, rng.gen_range(0.3..3.0)], vec![base, 0.0]).expect("cone")
        }
        CorpusKind::Random => random_profile_set(rng),
    };
    let s = (params.cap_volume / p.volume(params.n)).powf(1.0 / params.n as f64);
    (kind, p.scaled(s).expect("positive scale"))
}

pub fn mixed_corpus(params: &CapillarityParams, count: usize, seed: u64, nodes: usize) -> Vec<(CorpusKind, ProfileSet)> {
    (0..count).into_par_iter().map(|i| mixed_member(&mut item_rng(seed, i), params, nodes)).collect()
}

/// Random voxel set made symmetric about `{x_k = 0}` for each axis in `axes`.
///
/// The grid is centred on the planes, and the set is the union of the random set with its
/// reflections.
pub fn symmetric_voxel_set(rng: &mut ChaCha8Rng, n: usize, axes: &[usize]) -> VoxelSet {
    let v = random_voxel_set(rng, n);
    let shape = v.shape();
    let mut occ = v.occupancy().to_vec();
    for &axis in axes {
        let src = occ.clone();
        for flat in 0..src.len() {
            if src[flat] == 1 {
                let mut idx = v.multi_index(flat);
                idx[axis] = shape[axis] - 1 - idx[axis];
                occ[v.flat_index(&idx)] = 1;
            }
        }
    }
    VoxelSet::new(v.all_edges().to_vec(), occ).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::deficit;
    use crate::geometry::Shape;

    #[test]
    fn generators_are_deterministic() {
        let a = random_voxel_set(&mut item_rng(5, 3), 3);
        let b = random_voxel_set(&mut item_rng(5, 3), 3);
        assert_eq!(a, b);
        assert_eq!(random_profile_set(&mut item_rng(1, 0)), random_profile_set(&mut item_rng(1, 0)));
    }

    #[test]
    fn symmetric_sets_are_symmetric() {
        for i in 0..20 {
            let v = symmetric_voxel_set(&mut item_rng(2, i), 3, &[0, 1]);
            for axis in [0, 1] {
                assert_eq!(v.reflected(axis, 0.0).unwrap().occupancy(), v.occupancy());
            }
        }
    }

    #[test]
    fn mixed_corpus_members_have_bubble_volume() {
        let p = CapillarityParams::new(0.2, 2).unwrap();
        for (_, prof) in mixed_corpus(&p, 40, 11, 512) {
            let s = Shape::profile(prof, 2);
            assert!((s.volume() - p.cap_volume).abs() < 1e-9 * p.cap_volume);
            assert!(deficit(&s, &p).unwrap() >= -1e-9);
        }
    }
}
