use serde::{Deserialize, Serialize};

use super::voxel_quantile;
use crate::error::{domain, Result};
use crate::functionals::{
    asymmetry_alpha, asymmetry_alpha_restricted, bubble_pair_symdiff, deficit, SearchOptions,
};
use crate::geometry::{CapillarityParams, Shape, VoxelSet};

/// The hyperplane `{x_axis = a}` splitting the volume of `voxel` in half.
pub fn median_plane(voxel: &VoxelSet, axis: usize) -> Result<f64> {
    if axis + 1 >= voxel.dim() {
        return Err(domain(format!("axis {axis} is not parallel to the wall")));
    }
    voxel_quantile(voxel, axis, 0.5 * voxel.volume())
}

/// Halves `voxel` by its median plane along a wall-parallel `axis` and doubles each half by
/// reflection. Returns `(E⁻ ∪ r(E⁻), E⁺ ∪ r(E⁺))` and the plane coordinate.
pub fn bisect_reflect_at(voxel: &VoxelSet, axis: usize) -> Result<(VoxelSet, VoxelSet, f64)> {
    let a = median_plane(voxel, axis)?;
    let g = voxel.with_plane(axis, a);
    let e = g.edges(axis);
    let ja = e.partition_point(|&x| x < a);
    if ja == 0 || ja + 1 >= e.len() || e[ja] != a {
        return Err(domain("median plane does not fall inside the grid"));
    }
    let slabs = e.len() - 1;
    let left = g.select_slabs(axis, 0, ja);
    let right = g.select_slabs(axis, ja, slabs);
    let minus = VoxelSet::concat(&left, &left.reflected(axis, a)?, axis)?;
    let plus = VoxelSet::concat(&right.reflected(axis, a)?, &right, axis)?;
    Ok((minus.trimmed(), plus.trimmed(), a))
}

/// `bisect_reflect_at` without the plane coordinate.
pub fn bisect_reflect(voxel: &VoxelSet, axis: usize) -> Result<(VoxelSet, VoxelSet)> {
    let (m, p, _) = bisect_reflect_at(voxel, axis)?;
    Ok((m, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// One half-reflection of a parent set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub axis: usize,
    pub side: Side,
    pub plane: f64,
    pub volume: f64,
    pub deficit: f64,
    pub alpha: f64,
    /// Symmetric difference with the best bubble centred on the reflection plane, over `|E|`.
    pub restricted_alpha: f64,
    pub restricted_center: Vec<f64>,
}

/// One reduction step: all candidates, the kept one, and the one the existence argument points to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflectionStep {
    pub axes: Vec<usize>,
    pub parent_alpha: f64,
    pub parent_deficit: f64,
    pub candidates: Vec<Candidate>,
    /// Index of the kept candidate: the one with the largest α.
    pub chosen: usize,
    /// Index of the candidate selected by the proof's criterion.
    pub criterion_choice: usize,
    /// For pair steps, `|B⁺ Δ B⁻| / (|E'⁺ Δ B⁺| + |E'⁻ Δ B⁻|)` per axis; the criterion picks the
    /// smaller ratio.
    pub cap_ratios: Vec<f64>,
    /// Whether the kept candidate has `α ≥ α(parent) / 3`.
    pub third_bound_holds: bool,
    /// Whether every candidate has `D ≤ 2 D(parent) + 1e-6`.
    pub doubling_bound_holds: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SymmetryRecord {
    pub steps: Vec<ReflectionStep>,
}

fn candidate(
    set: &VoxelSet,
    axis: usize,
    side: Side,
    plane: f64,
    params: &CapillarityParams,
    options: &SearchOptions,
) -> Result<Candidate> {
    let shape = Shape::Voxel(set.clone());
    let alpha = asymmetry_alpha(&shape, params, options)?;
    let mut fixed = vec![None; params.n - 1];
    fixed[axis] = Some(plane);
    let restricted = asymmetry_alpha_restricted(set, params, &fixed, options)?;
    Ok(Candidate {
        axis,
        side,
        plane,
        volume: set.volume(),
        deficit: deficit(&shape, params)?,
        alpha: alpha.value,
        restricted_alpha: restricted.value,
        restricted_center: restricted.center,
    })
}

fn split(
    voxel: &VoxelSet,
    axis: usize,
    params: &CapillarityParams,
    options: &SearchOptions,
) -> Result<Vec<(VoxelSet, Candidate)>> {
    let (m, p, a) = bisect_reflect_at(voxel, axis)?;
    let cm = candidate(&m, axis, Side::Minus, a, params, options)?;
    let cp = candidate(&p, axis, Side::Plus, a, params, options)?;
    Ok(vec![(m, cm), (p, cp)])
}

fn argmax_alpha(c: &[(VoxelSet, Candidate)], range: std::ops::Range<usize>) -> usize {
    range.fold(usize::MAX, |best, i| {
        if best == usize::MAX || c[i].1.alpha > c[best].1.alpha {
            i
        } else {
            best
        }
    })
}

fn step(
    voxel: &VoxelSet,
    axes: &[usize],
    params: &CapillarityParams,
    options: &SearchOptions,
) -> Result<(VoxelSet, ReflectionStep)> {
    let parent = Shape::Voxel(voxel.clone());
    let parent_alpha = asymmetry_alpha(&parent, params, options)?.value;
    let parent_deficit = deficit(&parent, params)?;
    let mut all = Vec::new();
    for &axis in axes {
        all.extend(split(voxel, axis, params, options)?);
    }
    let chosen = argmax_alpha(&all, 0..all.len());
    let mut cap_ratios = Vec::new();
    let criterion_choice = if axes.len() == 1 {
        chosen
    } else {
        let vol = voxel.volume();
        for (i, _) in axes.iter().enumerate() {
            let (cm, cp) = (&all[2 * i].1, &all[2 * i + 1].1);
            let caps = bubble_pair_symdiff(params, vol, &cm.restricted_center, &cp.restricted_center)?;
            let sets = (cm.restricted_alpha * cm.volume + cp.restricted_alpha * cp.volume).max(f64::MIN_POSITIVE);
            cap_ratios.push(caps / sets);
        }
        let i = (0..axes.len()).min_by(|&a, &b| cap_ratios[a].total_cmp(&cap_ratios[b])).unwrap();
        argmax_alpha(&all, 2 * i..2 * i + 2)
    };
    let third_bound_holds = all[chosen].1.alpha >= parent_alpha / 3.0 - 1e-12;
    let doubling_bound_holds = all.iter().all(|(_, c)| c.deficit <= 2.0 * parent_deficit + 1e-6);
    let record = ReflectionStep {
        axes: axes.to_vec(),
        parent_alpha,
        parent_deficit,
        candidates: all.iter().map(|(_, c)| c.clone()).collect(),
        chosen,
        criterion_choice,
        cap_ratios,
        third_bound_holds,
        doubling_bound_holds,
    };
    Ok((all.swap_remove(chosen).0, record))
}

/// Reduces a voxel set to one symmetric about a hyperplane `{x_k = a_k}` for every wall axis.
///
/// In three dimensions the first step examines the four half-reflections across the two median
/// planes and the second reflects the survivor across the remaining axis; in two dimensions there
/// is a single step. Each step keeps the candidate with the largest α and records which one the
/// proof's criterion selects.
pub fn reduce_to_symmetric(
    voxel: &VoxelSet,
    params: &CapillarityParams,
    options: &SearchOptions,
) -> Result<(VoxelSet, SymmetryRecord)> {
    let n = voxel.dim();
    if n != params.n {
        return Err(domain(format!("set has dimension {n}, parameters have n = {}", params.n)));
    }
    let mut record = SymmetryRecord::default();
    let mut current = voxel.clone();
    if n == 2 {
        let (next, s) = step(&current, &[0], params, options)?;
        record.steps.push(s);
        current = next;
    } else {
        let (next, s) = step(&current, &[0, 1], params, options)?;
        let kept_axis = s.candidates[s.chosen].axis;
        record.steps.push(s);
        let (last, s) = step(&next, &[1 - kept_axis], params, options)?;
        record.steps.push(s);
        current = last;
    }
    Ok((current, record))
}
