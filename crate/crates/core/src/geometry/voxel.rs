use serde::{Deserialize, Serialize};

use super::{MeasureTriple, ProfileSet};
use crate::error::{domain, validation, Error, Result};

/// Default cap on the number of cells a rasterization may allocate.
pub const DEFAULT_MAX_CELLS: usize = 60_000_000;

/// A union of axis-aligned cells of a tensor-product grid in the half-space `{x_n >= 0}`.
///
/// Cells are stored row-major with the last (vertical) index fastest. The bottom grid
/// plane lies on the wall `{x_n = 0}`. Grids built by [`VoxelSet::uniform`] have equal
/// spacing on every axis; exact cuts and reflections may produce non-uniform edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelSet {
    dim: usize,
    edges: Vec<Vec<f64>>,
    occ: Vec<u8>,
}

/// A boundary face of a voxel set.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub axis: usize,
    /// `+1.0` if the outward normal points along `+e_axis`.
    pub sign: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub on_wall: bool,
}

impl Face {
    pub fn area(&self) -> f64 {
        (0..self.lo.len()).filter(|&k| k != self.axis).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

fn check_edges(axis: usize, e: &[f64]) -> Result<()> {
    if e.len() < 2 {
        return Err(validation(format!("axis {axis} needs at least one cell")));
    }
    if e.iter().any(|x| !x.is_finite()) {
        return Err(validation(format!("axis {axis} has non-finite edges")));
    }
    if e.windows(2).any(|w| w[1] <= w[0]) {
        return Err(validation(format!("axis {axis} edges are not strictly increasing")));
    }
    Ok(())
}

impl VoxelSet {
    pub fn new(edges: Vec<Vec<f64>>, occ: Vec<u8>) -> Result<Self> {
        let dim = edges.len();
        if !(2..=3).contains(&dim) {
            return Err(domain(format!("voxel sets support dimensions 2 and 3, got {dim}")));
        }
        for (k, e) in edges.iter().enumerate() {
            check_edges(k, e)?;
        }
        if edges[dim - 1][0] != 0.0 {
            return Err(validation(format!(
                "bottom cell faces must lie on the wall, found {}",
                edges[dim - 1][0]
            )));
        }
        let cells: usize = edges.iter().map(|e| e.len() - 1).product();
        if occ.len() != cells {
            return Err(validation(format!("occupancy has {} entries, grid has {cells}", occ.len())));
        }
        if occ.iter().any(|&b| b > 1) {
            return Err(validation("occupancy entries must be 0 or 1"));
        }
        Ok(Self { dim, edges, occ })
    }

    /// Uniform grid with spacing `h`; `origin` gives the lower corner, its last entry must be 0.
    pub fn uniform(dim: usize, h: f64, origin: &[f64], shape: &[usize], occ: Vec<u8>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(domain(format!("spacing must be positive, got {h}")));
        }
        if origin.len() != dim || shape.len() != dim {
            return Err(domain("origin and shape must have one entry per axis"));
        }
        let edges = (0..dim).map(|k| uniform_edges(origin[k], h, shape[k])).collect();
        Self::new(edges, occ)
    }

    /// Uniform grid whose cells are occupied when `inside(center)` holds.
    pub fn rasterize<F>(dim: usize, h: f64, origin: &[f64], shape: &[usize], max_cells: usize, inside: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool + Sync,
    {
        let total = shape.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
        match total {
            Some(t) if t <= max_cells => {}
            _ => {
                return Err(Error::Resource(format!(
                    "grid {shape:?} exceeds the cell budget of {max_cells}"
                )))
            }
        }
        let edges: Vec<Vec<f64>> = (0..dim).map(|k| uniform_edges(origin[k], h, shape[k])).collect();
        let total: usize = shape.iter().product();
        let occ: Vec<u8> = {
            use rayon::prelude::*;
            (0..total)
                .into_par_iter()
                .map(|flat| {
                    let idx = unravel(flat, shape);
                    let c: Vec<f64> = (0..dim).map(|k| 0.5 * (edges[k][idx[k]] + edges[k][idx[k] + 1])).collect();
                    inside(&c) as u8
                })
                .collect()
        };
        Self::new(edges, occ)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self, axis: usize) -> &[f64] {
        &self.edges[axis]
    }

    pub fn all_edges(&self) -> &[Vec<f64>] {
        &self.edges
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occ
    }

    pub fn shape(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.len() - 1).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.occ.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.occ.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_empty(&self) -> bool {
        self.occ.iter().all(|&b| b == 0)
    }

    pub fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut s = vec![1; self.dim];
        for k in (0..self.dim - 1).rev() {
            s[k] = s[k + 1] * shape[k + 1];
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let st = self.strides();
        idx.iter().zip(&st).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        unravel(flat, &self.shape())
    }

    pub fn is_occupied(&self, idx: &[usize]) -> bool {
        self.occ[self.flat_index(idx)] == 1
    }

    pub fn cell_bounds(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let lo = (0..self.dim).map(|k| self.edges[k][idx[k]]).collect();
        let hi = (0..self.dim).map(|k| self.edges[k][idx[k] + 1]).collect();
        (lo, hi)
    }

    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim).map(|k| 0.5 * (self.edges[k][idx[k]] + self.edges[k][idx[k] + 1])).collect()
    }

    pub fn cell_volume(&self, idx: &[usize]) -> f64 {
        (0..self.dim).map(|k| self.edges[k][idx[k] + 1] - self.edges[k][idx[k]]).product()
    }

    /// Flat indices of occupied cells in storage order.
    pub fn occupied_indices(&self) -> Vec<usize> {
        self.occ.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i).collect()
    }

    /// The common spacing if every axis is uniform with the same step (relative 1e-9).
    pub fn spacing(&self) -> Option<f64> {
        let h = self.edges[0][1] - self.edges[0][0];
        for e in &self.edges {
            for w in e.windows(2) {
                if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                    return None;
                }
            }
        }
        Some(h)
    }

    /// Smallest cell edge over all axes.
    pub fn min_edge(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest cell edge over all axes.
    pub fn max_edge(&self) -> f64 {
        self.edges.iter().flat_map(|e| e.windows(2).map(|w| w[1] - w[0])).fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        let shape = self.shape();
        let mut v = 0.0;
        for flat in self.occupied_indices() {
            let idx = unravel(flat, &shape);
            v += self.cell_volume(&idx);
        }
        v
    }

    fn face_area(&self, idx: &[usize], axis: usize) -> f64 {
        (0..self.dim)
            .filter(|&k| k != axis)
            .map(|k| self.edges[k][idx[k] + 1] - self.edges[k][idx[k]])
            .product()
    }

    fn neighbor_occupied(&self, idx: &[usize], axis: usize, up: bool, strides: &[usize], shape: &[usize]) -> bool {
        let flat: usize = idx.iter().zip(strides).map(|(i, s)| i * s).sum();
        if up {
            idx[axis] + 1 < shape[axis] && self.occ[flat + strides[axis]] == 1
        } else {
            idx[axis] > 0 && self.occ[flat - strides[axis]] == 1
        }
    }

    /// Visit every boundary face (relative faces and wall faces) of the occupied union.
    pub fn for_each_face<F: FnMut(&[usize], usize, bool, f64, bool)>(&self, mut f: F) {
        let shape = self.shape();
        let strides = self.strides();
        let v = self.dim - 1;
        for flat in self.occupied_indices() {
            let idx = unravel(flat, &shape);
            for axis in 0..self.dim {
                for up in [false, true] {
                    if !self.neighbor_occupied(&idx, axis, up, &strides, &shape) {
                        let on_wall = axis == v && !up && idx[v] == 0;
                        let area = self.face_area(&idx, axis);
                        f(&idx, axis, up, area, on_wall);
                    }
                }
            }
        }
    }

    pub fn measures(&self) -> MeasureTriple {
        let mut m = MeasureTriple::new(self.volume(), 0.0, 0.0);
        self.for_each_face(|_, _, _, area, on_wall| {
            if on_wall {
                m.wetted_area += area;
            } else {
                m.rel_perimeter += area;
            }
        });
        m
    }

    /// `∫ (1 - lambda <e_n, nu>)` over the relative boundary using exact face normals.
    pub fn flux_perimeter(&self, lambda: f64) -> f64 {
        let v = self.dim - 1;
        let mut total = 0.0;
        self.for_each_face(|_, axis, up, area, on_wall| {
            if on_wall {
                return;
            }
            let nu_n = if axis == v {
                if up {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            };
            total += area * (1.0 - lambda * nu_n);
        });
        total
    }

    /// All boundary faces with their geometry.
    pub fn boundary_faces(&self, include_wall: bool) -> Vec<Face> {
        let mut faces = Vec::new();
        self.for_each_face(|idx, axis, up, _, on_wall| {
            if on_wall && !include_wall {
                return;
            }
            let (mut lo, mut hi) = self.cell_bounds(idx);
            if up {
                lo[axis] = hi[axis];
            } else {
                hi[axis] = lo[axis];
            }
            faces.push(Face { axis, sign: if up { 1.0 } else { -1.0 }, lo, hi, on_wall });
        });
        faces
    }

    /// Cross-section measure of each slab perpendicular to `axis`.
    pub fn slab_areas(&self, axis: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut out = vec![0.0; shape[axis]];
        for flat in self.occupied_indices() {
            let idx = unravel(flat, &shape);
            out[idx[axis]] += self.face_area(&idx, axis);
        }
        out
    }

    /// `|E ∩ {x_axis < t}|`, exact.
    pub fn volume_below(&self, axis: usize, t: f64) -> f64 {
        let areas = self.slab_areas(axis);
        let e = &self.edges[axis];
        let mut v = 0.0;
        for (j, a) in areas.iter().enumerate() {
            let (lo, hi) = (e[j], e[j + 1]);
            if t <= lo {
                break;
            }
            v += a * (t.min(hi) - lo);
        }
        v
    }

    /// Occupied wall-level cells as boxes in the `n - 1` wall coordinates.
    pub fn footprint(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let shape = self.shape();
        let v = self.dim - 1;
        self.occupied_indices()
            .into_iter()
            .map(|flat| unravel(flat, &shape))
            .filter(|idx| idx[v] == 0)
            .map(|idx| {
                let (lo, hi) = self.cell_bounds(&idx);
                (lo[..v].to_vec(), hi[..v].to_vec())
            })
            .collect()
    }

    /// Volume-weighted centroid of the footprint in wall coordinates, or of the whole set if the
    /// footprint is empty.
    pub fn wall_centroid(&self) -> Vec<f64> {
        let v = self.dim - 1;
        let shape = self.shape();
        let mut acc = vec![0.0; v];
        let mut total = 0.0;
        let fp = self.footprint();
        if !fp.is_empty() {
            for (lo, hi) in fp {
                let a: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
                for k in 0..v {
                    acc[k] += a * 0.5 * (lo[k] + hi[k]);
                }
                total += a;
            }
        } else {
            for flat in self.occupied_indices() {
                let idx = unravel(flat, &shape);
                let w = self.cell_volume(&idx);
                let c = self.cell_center(&idx);
                for k in 0..v {
                    acc[k] += w * c[k];
                }
                total += w;
            }
        }
        if total > 0.0 {
            acc.iter_mut().for_each(|a| *a /= total);
        }
        acc
    }

    /// Bounding box `(lo, hi)` of the occupied cells, `None` when empty.
    pub fn occupied_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let shape = self.shape();
        let mut lo_idx = vec![usize::MAX; self.dim];
        let mut hi_idx = vec![0usize; self.dim];
        let mut any = false;
        for flat in self.occupied_indices() {
            any = true;
            let idx = unravel(flat, &shape);
            for k in 0..self.dim {
                lo_idx[k] = lo_idx[k].min(idx[k]);
                hi_idx[k] = hi_idx[k].max(idx[k]);
            }
        }
        if !any {
            return None;
        }
        Some((
            (0..self.dim).map(|k| self.edges[k][lo_idx[k]]).collect(),
            (0..self.dim).map(|k| self.edges[k][hi_idx[k] + 1]).collect(),
        ))
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(domain(format!("scale factor must be positive, got {s}")));
        }
        let edges = self.edges.iter().map(|e| e.iter().map(|x| x * s).collect()).collect();
        Self::new(edges, self.occ.clone())
    }

    /// Translation along a wall-parallel axis.
    pub fn translated(&self, axis: usize, dx: f64) -> Result<Self> {
        if axis + 1 >= self.dim {
            return Err(domain("only wall-parallel axes can be translated"));
        }
        let mut edges = self.edges.clone();
        edges[axis].iter_mut().for_each(|x| *x += dx);
        Self::new(edges, self.occ.clone())
    }

    /// Mirror image across the hyperplane `{x_axis = a}` of a wall-parallel axis.
    pub fn reflected(&self, axis: usize, a: f64) -> Result<Self> {
        if axis + 1 >= self.dim {
            return Err(domain("only wall-parallel axes can be reflected"));
        }
        let shape = self.shape();
        let mut edges = self.edges.clone();
        edges[axis] = self.edges[axis].iter().rev().map(|x| 2.0 * a - x).collect();
        let mut occ = vec![0u8; self.occ.len()];
        for (flat, &b) in self.occ.iter().enumerate() {
            if b == 1 {
                let mut idx = unravel(flat, &shape);
                idx[axis] = shape[axis] - 1 - idx[axis];
                occ[ravel(&idx, &shape)] = 1;
            }
        }
        Self::new(edges, occ)
    }

    /// Insert a grid plane at `x` along `axis`, splitting the slab it crosses.
    pub fn with_plane(&self, axis: usize, x: f64) -> Self {
        let e = &self.edges[axis];
        let j = e.partition_point(|&v| v < x);
        if j == 0 || j >= e.len() || e[j] == x {
            return self.clone();
        }
        // x lies strictly inside slab j - 1
        let split = j - 1;
        let shape = self.shape();
        let mut new_shape = shape.clone();
        new_shape[axis] += 1;
        let mut edges = self.edges.clone();
        edges[axis].insert(j, x);
        let total: usize = new_shape.iter().product();
        let mut occ = vec![0u8; total];
        for (flat, o) in occ.iter_mut().enumerate() {
            let mut idx = unravel(flat, &new_shape);
            if idx[axis] > split {
                idx[axis] -= 1;
            }
            *o = self.occ[ravel(&idx, &shape)];
        }
        Self { dim: self.dim, edges, occ }
    }

    /// Keep only the slabs of `axis` inside `[lo, hi]`, cutting exactly at the bounds.
    ///
    /// Cropping the vertical axis from below is not allowed (the wall stays at 0).
    pub fn cropped(&self, axis: usize, lo: f64, hi: f64) -> Result<Self> {
        if axis + 1 == self.dim && lo > 0.0 {
            return Err(domain("the vertical axis can only be cropped from above"));
        }
        let mut g = self.with_plane(axis, lo).with_plane(axis, hi);
        let e = &g.edges[axis];
        let j0 = e.partition_point(|&v| v < lo);
        let j1 = e.partition_point(|&v| v <= hi).saturating_sub(1);
        if j1 <= j0 {
            return Err(domain(format!("crop window [{lo}, {hi}] leaves no cells")));
        }
        g = g.select_slabs(axis, j0, j1);
        Ok(g)
    }

    /// Sub-grid of slabs `j0..j1` along `axis`.
    pub fn select_slabs(&self, axis: usize, j0: usize, j1: usize) -> Self {
        let shape = self.shape();
        let mut new_shape = shape.clone();
        new_shape[axis] = j1 - j0;
        let mut edges = self.edges.clone();
        edges[axis] = self.edges[axis][j0..=j1].to_vec();
        let total: usize = new_shape.iter().product();
        let mut occ = vec![0u8; total];
        for (flat, o) in occ.iter_mut().enumerate() {
            let mut idx = unravel(flat, &new_shape);
            idx[axis] += j0;
            *o = self.occ[ravel(&idx, &shape)];
        }
        Self { dim: self.dim, edges, occ }
    }

    /// Drop empty boundary slabs (keeping the wall row), which never changes the set.
    pub fn trimmed(&self) -> Self {
        let Some((lo, hi)) = self.occupied_bounds() else {
            return self.clone();
        };
        let mut g = self.clone();
        for axis in 0..self.dim {
            let e = &g.edges[axis];
            let j0 = if axis + 1 == self.dim { 0 } else { e.partition_point(|&v| v < lo[axis]) };
            let j1 = e.partition_point(|&v| v < hi[axis]);
            g = g.select_slabs(axis, j0, j1);
        }
        g
    }

    /// Join two sets that share all edges except along `axis`, where `a` ends where `b` begins.
    pub fn concat(a: &Self, b: &Self, axis: usize) -> Result<Self> {
        if a.dim != b.dim {
            return Err(domain("dimension mismatch in concatenation"));
        }
        for k in 0..a.dim {
            if k != axis && a.edges[k] != b.edges[k] {
                return Err(domain(format!("axis {k} grids differ in concatenation")));
            }
        }
        if a.edges[axis].last() != b.edges[axis].first() {
            return Err(domain("concatenated grids do not meet"));
        }
        let (sa, sb) = (a.shape(), b.shape());
        let mut shape = sa.clone();
        shape[axis] += sb[axis];
        let mut edges = a.edges.clone();
        edges[axis].extend_from_slice(&b.edges[axis][1..]);
        let total: usize = shape.iter().product();
        let mut occ = vec![0u8; total];
        for (flat, o) in occ.iter_mut().enumerate() {
            let mut idx = unravel(flat, &shape);
            *o = if idx[axis] < sa[axis] {
                a.occ[ravel(&idx, &sa)]
            } else {
                idx[axis] -= sa[axis];
                b.occ[ravel(&idx, &sb)]
            };
        }
        Self::new(edges, occ)
    }

    /// Number of face-connected components of the occupied cells.
    pub fn component_count(&self) -> usize {
        let shape = self.shape();
        let strides = self.strides();
        let mut label = vec![false; self.occ.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in self.occupied_indices() {
            if label[start] {
                continue;
            }
            count += 1;
            label[start] = true;
            stack.push(start);
            while let Some(c) = stack.pop() {
                let idx = unravel(c, &shape);
                for axis in 0..self.dim {
                    if idx[axis] > 0 {
                        let nb = c - strides[axis];
                        if self.occ[nb] == 1 && !label[nb] {
                            label[nb] = true;
                            stack.push(nb);
                        }
                    }
                    if idx[axis] + 1 < shape[axis] {
                        let nb = c + strides[axis];
                        if self.occ[nb] == 1 && !label[nb] {
                            label[nb] = true;
                            stack.push(nb);
                        }
                    }
                }
            }
        }
        count
    }
}

pub(crate) fn uniform_edges(origin: f64, h: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| origin + i as f64 * h).collect()
}

pub(crate) fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

pub(crate) fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (i, s)| acc * s + i)
}

/// Rasterize the solid of revolution of `profile` in dimension `n` at spacing `h`.
///
/// A cell is occupied when its centre lies inside the set; the wall-parallel grid is
/// symmetric about the axis.
pub fn voxelize(profile: &ProfileSet, n: usize, h: f64) -> Result<VoxelSet> {
    voxelize_with_budget(profile, n, h, DEFAULT_MAX_CELLS)
}

pub fn voxelize_with_budget(profile: &ProfileSet, n: usize, h: f64, max_cells: usize) -> Result<VoxelSet> {
    if !(2..=3).contains(&n) {
        return Err(domain(format!("voxelization supports n = 2 or 3, got {n}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(domain(format!("spacing must be positive, got {h}")));
    }
    let half = (profile.max_radius() / h).ceil() as usize + 1;
    let rows = ((profile.top() / h).ceil() as usize).max(1);
    let mut shape = vec![2 * half; n - 1];
    shape.push(rows);
    let mut origin = vec![-(half as f64) * h; n - 1];
    origin.push(0.0);
    VoxelSet::rasterize(n, h, &origin, &shape, max_cells, |c| {
        let r2: f64 = c[..n - 1].iter().map(|x| x * x).sum();
        let rho = profile.radius_at(c[n - 1]);
        r2 < rho * rho
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bubble, CapillarityParams};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn block(dim: usize, shape: &[usize], occ: Vec<u8>) -> VoxelSet {
        VoxelSet::uniform(dim, 1.0, &vec![0.0; dim], shape, occ).unwrap()
    }

    #[test]
    fn unit_cells() {
        let m = block(2, &[1, 1], vec![1]).measures();
        assert_eq!((m.volume, m.rel_perimeter, m.wetted_area), (1.0, 3.0, 1.0));
        let m = block(2, &[2, 2], vec![1; 4]).measures();
        assert_eq!((m.volume, m.rel_perimeter, m.wetted_area), (4.0, 6.0, 2.0));
        let m = block(3, &[1, 1, 1], vec![1]).measures();
        assert_eq!((m.volume, m.rel_perimeter, m.wetted_area), (1.0, 5.0, 1.0));
    }

    #[test]
    fn flux_of_unit_square() {
        assert_relative_eq!(block(2, &[1, 1], vec![1]).flux_perimeter(0.5), 2.5);
    }

    #[test]
    fn floating_cell_has_no_wetted_area() {
        // column of two rows with only the upper cell occupied
        let m = block(2, &[1, 2], vec![0, 1]).measures();
        assert_eq!((m.volume, m.rel_perimeter, m.wetted_area), (1.0, 4.0, 0.0));
    }

    #[test]
    fn plane_insertion_and_crop_are_exact() {
        let v = block(2, &[3, 2], vec![1, 1, 1, 0, 1, 1]);
        let w = v.with_plane(0, 1.25);
        assert_eq!(w.measures(), v.measures());
        let c = v.cropped(0, 0.5, 2.0).unwrap();
        assert_relative_eq!(c.volume(), 0.5 * 2.0 + 1.0);
        let top = v.cropped(1, 0.0, 1.5).unwrap();
        assert_relative_eq!(top.volume(), 3.0 + 0.5 * 2.0);
        assert!(v.cropped(1, 0.5, 2.0).is_err());
    }

    #[test]
    fn reflection_and_concat() {
        let v = block(2, &[2, 1], vec![1, 0]);
        let r = v.reflected(0, 2.0).unwrap();
        assert_eq!(r.edges(0), &[2.0, 3.0, 4.0]);
        assert_eq!(r.occupancy(), &[0, 1]);
        let j = VoxelSet::concat(&v, &r, 0).unwrap();
        assert_eq!(j.occupancy(), &[1, 0, 0, 1]);
        assert_eq!(j.component_count(), 2);
    }

    #[test]
    fn voxelized_bubble_volume() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let prof = ProfileSet::from_bubble(&Bubble::unit(p), 4096).unwrap();
        let v = voxelize(&prof, 2, 0.01).unwrap();
        assert!((v.volume() - PI / 2.0).abs() < 0.02 * PI / 2.0);
        assert_eq!(v.component_count(), 1);
        let cone = ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!((voxelize(&cone, 2, 0.005).unwrap().volume() - 1.0).abs() < 0.01);
        let flat = ProfileSet::new(vec![0.0, 1e-9], vec![1.0, 0.0]).unwrap();
        assert!(voxelize(&flat, 2, 0.1).unwrap().is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let cone = ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(voxelize_with_budget(&cone, 3, 0.01, 1000), Err(Error::Resource(_))));
    }
}
