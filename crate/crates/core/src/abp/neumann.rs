use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{CapillarityParams, VoxelSet};

/// Relative tolerance of the conjugate-gradient solve.
pub const SOLVE_TOL: f64 = 1e-10;

const NONE: usize = usize::MAX;

/// Discrete solution of `Δu = P_λ(E)/|E|` in `E` with `∂u/∂ν = 1` on the relative boundary and
/// `∂u/∂ν = -λ` on the wall, on a uniform planar grid.
///
/// Per-cell arrays are indexed like `cells`. Face derivatives use neighbour differences inside
/// `E` and the Neumann data on boundary faces; the gradient is the mean of opposite face
/// derivatives and `∂²u/∂x²` their difference over `h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannSolution {
    pub domain: VoxelSet,
    pub h: f64,
    pub lambda: f64,
    /// Grid index `(i, j)` of every occupied cell.
    pub cells: Vec<[usize; 2]>,
    pub centers: Vec<[f64; 2]>,
    pub u: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    /// `[u_xx, u_xy, u_yy]` per cell.
    pub hessian: Vec<[f64; 3]>,
    /// The constant right-hand side `P_λ(E)/|E|`.
    pub rhs: f64,
    /// `Σ` of the Neumann data over boundary faces, times the face length.
    pub boundary_flux: f64,
    pub volume: f64,
    pub mean_zero: bool,
    /// Relative residual `|b - A u| / |b|` of the linear solve.
    pub residual: f64,
    /// Norm of the component of the load removed to make the system compatible.
    pub projection_norm: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub(crate) index: Vec<usize>,
    #[serde(skip)]
    pub(crate) shape: [usize; 2],
}

impl NeumannSolution {
    /// Solution index of grid cell `(i, j)`, if occupied.
    pub fn cell_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.shape[0] || j as usize >= self.shape[1] {
            return None;
        }
        let k = self.index[i as usize * self.shape[1] + j as usize];
        (k != NONE).then_some(k)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Discrete Laplacian `u_xx + u_yy` per cell.
    pub fn laplacian(&self) -> Vec<f64> {
        self.hessian.iter().map(|h| h[0] + h[2]).collect()
    }

    /// Occupied 4-neighbours of cell `k`.
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let [i, j] = self.cells[k];
        let (i, j) = (i as isize, j as isize);
        [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)].into_iter().filter_map(move |(a, b)| self.cell_at(a, b))
    }

    /// `|Σ g h - rhs |E|| / (rhs |E|)`.
    pub fn compatibility_error(&self) -> f64 {
        let m = self.rhs * self.volume;
        (self.boundary_flux - m).abs() / m.abs().max(f64::MIN_POSITIVE)
    }

    pub fn mean(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }

    /// Dense `u`, `grad_x`, `grad_y` rasters over the domain grid, NaN outside the set.
    pub fn channels(&self) -> Vec<(&'static str, Vec<f64>)> {
        let total = self.shape[0] * self.shape[1];
        let mut out = vec![vec![f64::NAN; total]; 3];
        for (k, &[i, j]) in self.cells.iter().enumerate() {
            let f = self.domain.flat_index(&[i, j]);
            out[0][f] = self.u[k];
            out[1][f] = self.grad[k][0];
            out[2][f] = self.grad[k][1];
        }
        let mut it = out.into_iter();
        vec![("u", it.next().unwrap()), ("grad_x", it.next().unwrap()), ("grad_y", it.next().unwrap())]
    }
}

struct System {
    nb: Vec<[usize; 4]>,
    diag: Vec<f64>,
}

impl System {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = self.diag[k] * x[k];
            for &m in &self.nb[k] {
                if m != NONE {
                    s -= x[m];
                }
            }
            *o = s;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(x: &mut [f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
    m
}

/// Jacobi-preconditioned conjugate gradients on the zero-mean subspace.
fn solve(sys: &System, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0.0, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&sys.diag).map(|(r, d)| r / d).collect();
    remove_mean(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut rel = 1.0;
    while it < max_iter {
        sys.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        it += 1;
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            break;
        }
        for k in 0..n {
            z[k] = r[k] / sys.diag[k];
        }
        remove_mean(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    remove_mean(&mut x);
    // true residual of the returned iterate
    sys.apply(&x, &mut ap);
    let true_rel = b.iter().zip(&ap).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt() / bnorm;
    if true_rel > tol.max(rel) * 10.0 {
        return Err(Error::Numeric { message: format!("conjugate gradients stalled after {it} iterations"), residual: true_rel });
    }
    Ok((x, true_rel, it))
}

/// Solves the capillarity Neumann problem on a connected planar voxel domain.
pub fn solve_neumann(domain: &VoxelSet, params: &CapillarityParams) -> Result<NeumannSolution> {
    if domain.dim() != 2 || params.n != 2 {
        return Err(domain_err("the Neumann solver works on planar domains (n = 2)"));
    }
    let h = domain.spacing().ok_or_else(|| domain_err("the Neumann solver needs a uniform grid"))?;
    if domain.is_empty() {
        return Err(domain_err("empty domain"));
    }
    if domain.component_count() != 1 {
        return Err(domain_err("domain must be connected; solve each component separately"));
    }
    let lambda = params.lambda;
    let shape = domain.shape();
    let (nx, ny) = (shape[0], shape[1]);
    let mut index = vec![NONE; nx * ny];
    let mut cells = Vec::new();
    for flat in domain.occupied_indices() {
        let (i, j) = (flat / ny, flat % ny);
        index[flat] = cells.len();
        cells.push([i, j]);
    }
    let at = |i: isize, j: isize| -> usize {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            NONE
        } else {
            index[i as usize * ny + j as usize]
        }
    };
    let wall_row = domain.edges(1)[0] == 0.0;
    let n = cells.len();
    let mut nb = vec![[NONE; 4]; n];
    let mut diag = vec![0.0_f64; n];
    // Neumann data on the east, west, north, south faces (NaN for interior faces)
    let mut data = vec![[f64::NAN; 4]; n];
    let mut boundary_flux = 0.0;
    for (k, &[i, j]) in cells.iter().enumerate() {
        let (i, j) = (i as isize, j as isize);
        for (d, (a, b)) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)].into_iter().enumerate() {
            let m = at(a, b);
            if m != NONE {
                nb[k][d] = m;
                diag[k] += 1.0;
            } else {
                let on_wall = d == 3 && j == 0 && wall_row;
                let g = if on_wall { -lambda } else { 1.0 };
                data[k][d] = g;
                boundary_flux += g * h;
            }
        }
    }
    if n > 1 && diag.iter().any(|&d| d == 0.0) {
        return Err(domain_err("domain has an isolated cell"));
    }
    let volume = n as f64 * h * h;
    let rhs = boundary_flux / volume;
    // Σ_nb (u_c - u_nb) = Σ_bdry g h - rhs h²
    let mut b: Vec<f64> = data
        .iter()
        .map(|d| d.iter().filter(|g| !g.is_nan()).sum::<f64>() * h - rhs * h * h)
        .collect();
    let shift = remove_mean(&mut b);
    let projection_norm = shift.abs() * (n as f64).sqrt();
    let (u, residual, iterations) = if n == 1 {
        (vec![0.0], 0.0, 0)
    } else {
        diag.iter_mut().for_each(|d: &mut f64| *d = d.max(1.0));
        let sys = System { nb: nb.clone(), diag };
        solve(&sys, &b, SOLVE_TOL, 20 * n + 1000)?
    };
    let ex = domain.edges(0);
    let ey = domain.edges(1);
    let centers: Vec<[f64; 2]> =
        cells.iter().map(|&[i, j]| [0.5 * (ex[i] + ex[i + 1]), 0.5 * (ey[j] + ey[j + 1])]).collect();
    // face derivatives in the +x / +y direction
    let mut grad = vec![[0.0; 2]; n];
    let mut second = vec![[0.0; 2]; n];
    for k in 0..n {
        let face = |d: usize, sign: f64| -> f64 {
            let m = nb[k][d];
            if m != NONE {
                sign * (u[m] - u[k]) / h
            } else {
                sign * data[k][d]
            }
        };
        let (fe, fw, fn_, fs) = (face(0, 1.0), face(1, -1.0), face(2, 1.0), face(3, -1.0));
        grad[k] = [0.5 * (fe + fw), 0.5 * (fn_ + fs)];
        second[k] = [(fe - fw) / h, (fn_ - fs) / h];
    }
    let mixed = |k: usize, comp: usize, plus: usize, minus: usize| -> f64 {
        match (nb[k][plus], nb[k][minus]) {
            (p, m) if p != NONE && m != NONE => (grad[p][comp] - grad[m][comp]) / (2.0 * h),
            (p, _) if p != NONE => (grad[p][comp] - grad[k][comp]) / h,
            (_, m) if m != NONE => (grad[k][comp] - grad[m][comp]) / h,
            _ => 0.0,
        }
    };
    let hessian = (0..n)
        .map(|k| {
            let uxy = 0.5 * (mixed(k, 1, 0, 1) + mixed(k, 0, 2, 3));
            [second[k][0], uxy, second[k][1]]
        })
        .collect();
    Ok(NeumannSolution {
        domain: domain.clone(),
        h,
        lambda,
        cells,
        centers,
        u,
        grad,
        hessian,
        rhs,
        boundary_flux,
        volume,
        mean_zero: true,
        residual,
        projection_norm,
        iterations,
        index,
        shape: [nx, ny],
    })
}

fn domain_err(msg: &str) -> Error {
    domain(msg)
}
