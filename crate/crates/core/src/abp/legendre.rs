use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NeumannSolution;
use crate::geometry::CapillarityParams;

/// `q ↦ max_i <q, p_i> - v_i` over a fixed planar point cloud, by branch and bound over tiles.
///
/// Each tile stores a least-squares plane `v ≈ a + <g, p>` and the minimum of `v - <g, p>`, so
/// its bound `max_{p ∈ box} <q - g, p> - min(v - <g, p>)` is tight where `q ≈ g`.
pub(crate) struct AffineMax {
    pts: Vec<[f64; 2]>,
    vals: Vec<f64>,
    order: Vec<usize>,
    tiles: Vec<Tile>,
}

struct Tile {
    lo: [f64; 2],
    hi: [f64; 2],
    slope: [f64; 2],
    min_w: f64,
    start: usize,
    end: usize,
}

const TILE_POINTS: f64 = 32.0;

impl AffineMax {
    pub(crate) fn new(pts: Vec<[f64; 2]>, vals: Vec<f64>) -> Self {
        let n = pts.len();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let per_axis = ((n as f64 / TILE_POINTS).sqrt().ceil() as usize).max(1);
        let size = [(hi[0] - lo[0]).max(1e-300) / per_axis as f64, (hi[1] - lo[1]).max(1e-300) / per_axis as f64];
        let key = |p: &[f64; 2]| {
            let a = (((p[0] - lo[0]) / size[0]) as usize).min(per_axis - 1);
            let b = (((p[1] - lo[1]) / size[1]) as usize).min(per_axis - 1);
            a * per_axis + b
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (key(&pts[i]), i));
        let mut tiles = Vec::new();
        let mut s = 0;
        while s < n {
            let kk = key(&pts[order[s]]);
            let mut e = s;
            while e < n && key(&pts[order[e]]) == kk {
                e += 1;
            }
            tiles.push(Self::tile(&pts, &vals, &order[s..e], s, e));
            s = e;
        }
        Self { pts, vals, order, tiles }
    }

    fn tile(pts: &[[f64; 2]], vals: &[f64], idx: &[usize], start: usize, end: usize) -> Tile {
        let m = idx.len() as f64;
        let (mut sx, mut sy, mut sv) = (0.0, 0.0, 0.0);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &i in idx {
            sx += pts[i][0];
            sy += pts[i][1];
            sv += vals[i];
            for k in 0..2 {
                lo[k] = lo[k].min(pts[i][k]);
                hi[k] = hi[k].max(pts[i][k]);
            }
        }
        let (mx, my, mv) = (sx / m, sy / m, sv / m);
        let (mut cxx, mut cxy, mut cyy, mut cxv, mut cyv) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &i in idx {
            let (dx, dy, dv) = (pts[i][0] - mx, pts[i][1] - my, vals[i] - mv);
            cxx += dx * dx;
            cxy += dx * dy;
            cyy += dy * dy;
            cxv += dx * dv;
            cyv += dy * dv;
        }
        let det = cxx * cyy - cxy * cxy;
        let slope = if det > 1e-12 * (cxx * cyy).max(1e-300) {
            [(cyy * cxv - cxy * cyv) / det, (cxx * cyv - cxy * cxv) / det]
        } else {
            [0.0, 0.0]
        };
        let min_w = idx
            .iter()
            .map(|&i| vals[i] - slope[0] * pts[i][0] - slope[1] * pts[i][1])
            .fold(f64::INFINITY, f64::min);
        Tile { lo, hi, slope, min_w, start, end }
    }

    fn bound(t: &Tile, q: &[f64; 2]) -> f64 {
        let a = q[0] - t.slope[0];
        let b = q[1] - t.slope[1];
        (a * t.lo[0]).max(a * t.hi[0]) + (b * t.lo[1]).max(b * t.hi[1]) - t.min_w
    }

    /// Maximum value and the index of the maximizing point; ties go to the smaller index.
    pub(crate) fn query(&self, q: &[f64; 2]) -> (f64, usize) {
        let bounds: Vec<f64> = self.tiles.iter().map(|t| Self::bound(t, q)).collect();
        let first = (0..bounds.len()).max_by(|&a, &b| bounds[a].total_cmp(&bounds[b])).unwrap();
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        let scan = |t: &Tile, best: &mut (f64, usize)| {
            for &i in &self.order[t.start..t.end] {
                let v = q[0] * self.pts[i][0] + q[1] * self.pts[i][1] - self.vals[i];
                if v > best.0 || (v == best.0 && i < best.1) {
                    *best = (v, i);
                }
            }
        };
        scan(&self.tiles[first], &mut best);
        for (k, t) in self.tiles.iter().enumerate() {
            // the bound can round below an exact tie, so compare with a small margin
            if k != first && bounds[k] >= best.0 - 1e-12 * (1.0 + best.0.abs()) {
                scan(t, &mut best);
            }
        }
        best
    }

    pub(crate) fn point(&self, i: usize) -> [f64; 2] {
        self.pts[i]
    }
}

/// Samples of `u*(ξ) = max_y <ξ, y> - u(y)` on a grid over `K = closure{|ξ| < 1, ξ_2 > λ}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugateSamples {
    pub xi_step: f64,
    pub lambda: f64,
    pub xi: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    /// Index of the maximizing cell for each `ξ`.
    pub argmax: Vec<usize>,
}

/// Grid nodes `(i d, λ + j d)` inside `K`, plus points on its circular arc at spacing `d`.
pub fn cap_grid(lambda: f64, d: f64) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    let imax = (1.0 / d).floor() as i64;
    let jmax = ((1.0 - lambda) / d).floor() as i64;
    for i in -imax..=imax {
        for j in 0..=jmax {
            let x = i as f64 * d;
            let y = lambda + j as f64 * d;
            if x * x + y * y <= 1.0 {
                pts.push([x, y]);
            }
        }
    }
    let phi0 = lambda.asin();
    let phi1 = std::f64::consts::PI - phi0;
    let m = ((phi1 - phi0) / d).ceil() as usize;
    for k in 0..=m {
        let phi = phi0 + (phi1 - phi0) * k as f64 / m as f64;
        pts.push([phi.cos(), phi.sin()]);
    }
    pts
}

/// Legendre transform of the cell samples of `u`, restricted to `ξ ∈ K`.
pub fn restricted_legendre(sol: &NeumannSolution, params: &CapillarityParams, xi_step: f64) -> ConjugateSamples {
    let am = AffineMax::new(sol.centers.clone(), sol.u.clone());
    let xi = cap_grid(params.lambda, xi_step);
    let res: Vec<(f64, usize)> = xi.par_iter().map(|q| am.query(q)).collect();
    ConjugateSamples {
        xi_step,
        lambda: params.lambda,
        xi,
        values: res.iter().map(|r| r.0).collect(),
        argmax: res.iter().map(|r| r.1).collect(),
    }
}

/// The envelope `Ψ(x) = max_{ξ ∈ K} <ξ, x> - u*(ξ)` sampled on the cell centres of a domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingField {
    pub h: f64,
    pub xi_step: f64,
    pub psi: Vec<f64>,
    /// Maximizing `ξ` at each cell centre.
    pub grad: Vec<[f64; 2]>,
    /// `[Ψ_xx, Ψ_xy, Ψ_yy]` from second differences of `Ψ` at spacing `h`.
    pub hessian: Vec<[f64; 3]>,
    /// `∇Ψ` at the midpoints of the relative-boundary faces.
    pub boundary_grad: Vec<[f64; 2]>,
    pub conjugate: ConjugateSamples,
}

/// Evaluates `Ψ` at arbitrary points.
pub struct Envelope {
    am: AffineMax,
}

impl Envelope {
    pub fn new(conj: &ConjugateSamples) -> Self {
        Self { am: AffineMax::new(conj.xi.clone(), conj.values.clone()) }
    }

    /// `(Ψ(x), ∇Ψ(x))` with the gradient taken as the maximizing `ξ`.
    pub fn eval(&self, x: &[f64; 2]) -> (f64, [f64; 2]) {
        let (v, i) = self.am.query(x);
        (v, self.am.point(i))
    }
}

/// Builds `Ψ` on the cell centres of the solution's domain.
pub fn k_envelope(sol: &NeumannSolution, conj: &ConjugateSamples) -> CouplingField {
    let env = Envelope::new(conj);
    let h = sol.h;
    let origin = [sol.centers[0][0] - sol.cells[0][0] as f64 * h, sol.centers[0][1] - sol.cells[0][1] as f64 * h];
    // Ψ on the cell lattice dilated by one cell, shared by neighbouring stencils
    let mut nodes: Vec<[i64; 2]> = sol
        .cells
        .iter()
        .flat_map(|&[i, j]| {
            let (i, j) = (i as i64, j as i64);
            (-1..=1).flat_map(move |a| (-1..=1).map(move |b| [i + a, j + b]))
        })
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    let values: Vec<(f64, [f64; 2])> = nodes
        .par_iter()
        .map(|&[i, j]| env.eval(&[origin[0] + i as f64 * h, origin[1] + j as f64 * h]))
        .collect();
    let at = |i: i64, j: i64| values[nodes.binary_search(&[i, j]).expect("node in dilated lattice")];
    let per_cell: Vec<(f64, [f64; 2], [f64; 3])> = sol
        .cells
        .iter()
        .map(|&[i, j]| {
            let (i, j) = (i as i64, j as i64);
            let p = |a: i64, b: i64| at(i + a, j + b).0;
            let xx = (p(1, 0) - 2.0 * p(0, 0) + p(-1, 0)) / (h * h);
            let yy = (p(0, 1) - 2.0 * p(0, 0) + p(0, -1)) / (h * h);
            let xy = (p(1, 1) - p(1, -1) - p(-1, 1) + p(-1, -1)) / (4.0 * h * h);
            let (v, g) = at(i, j);
            (v, g, [xx, xy, yy])
        })
        .collect();
    let boundary_grad = relative_face_midpoints(sol).par_iter().map(|m| env.eval(m).1).collect();
    CouplingField {
        h,
        xi_step: conj.xi_step,
        psi: per_cell.iter().map(|r| r.0).collect(),
        grad: per_cell.iter().map(|r| r.1).collect(),
        hessian: per_cell.iter().map(|r| r.2).collect(),
        boundary_grad,
        conjugate: conj.clone(),
    }
}

fn relative_face_midpoints(sol: &NeumannSolution) -> Vec<[f64; 2]> {
    sol.domain
        .boundary_faces(false)
        .iter()
        .map(|f| {
            let m = f.midpoint();
            [m[0], m[1]]
        })
        .collect()
}

/// `R1 = Σ_E |∇²Ψ - id|_F h²` and `R2 = Σ_{relative faces} (1 - |∇Ψ|) h`.
pub fn coupling_residuals(field: &CouplingField) -> (f64, f64) {
    let h2 = field.h * field.h;
    let r1 = field
        .hessian
        .iter()
        .map(|&[a, b, c]| ((a - 1.0).powi(2) + 2.0 * b * b + (c - 1.0).powi(2)).sqrt() * h2)
        .sum();
    let r2 = field.boundary_grad.iter().map(|g| (1.0 - g[0].hypot(g[1])) * field.h).sum();
    (r1, r2)
}
