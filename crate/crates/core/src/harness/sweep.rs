use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::perturb::{c1_distance, graph_perturbation_family, PerturbationMode, PerturbationSpec, DEFAULT_NODES};
use crate::abp::analyze_domain;
use crate::error::{domain, Error, Result};
use crate::functionals::{evaluate, SearchOptions};
use crate::geometry::{voxelize, CapillarityParams, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: PerturbationMode,
    pub volume_renormalize: bool,
    pub nodes: usize,
    /// Voxel spacing for the ABP residual columns (`n = 2` only); `None` skips them.
    pub abp_h: Option<f64>,
    /// Conjugate grid spacing as a multiple of `abp_h`.
    pub xi_step_factor: f64,
    pub search: SearchOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mode: PerturbationMode::Legendre(2),
            volume_renormalize: true,
            nodes: DEFAULT_NODES,
            abp_h: None,
            xi_step_factor: 0.25,
            search: SearchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub volume: f64,
    pub p_lambda: f64,
    pub deficit: f64,
    pub alpha: f64,
    pub beta: f64,
    pub hausdorff: f64,
    pub c1_distance: f64,
    /// NaN when the ABP columns are off.
    pub r1: f64,
    pub r2: f64,
    pub r2_floor: f64,
    /// Deficit of the raster the residuals were computed on.
    pub raster_deficit: f64,
}

impl SweepRow {
    pub fn alpha_sq_over_deficit(&self) -> f64 {
        ratio(self.alpha * self.alpha, self.deficit)
    }

    pub fn beta_ratio(&self, n: usize) -> f64 {
        let d = self.deficit;
        ratio(self.beta, if d > 0.0 { d.max(d.powf(1.0 / (2.0 * n as f64))) } else { d })
    }
}

/// `a / b` with `0 / 0 = 0` and `a / 0 = ∞` for `a > 0`.
pub fn ratio(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMeta {
    pub lambda: f64,
    pub n: usize,
    pub config: SweepConfig,
    pub schedule: Vec<f64>,
    /// Set when a row failed; the table then holds the rows before it.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "eps",
    "volume",
    "p_lambda",
    "deficit",
    "alpha",
    "beta",
    "hausdorff",
    "c1_distance",
    "r1",
    "r2",
    "r2_floor",
    "raster_deficit",
    "alpha_sq_over_deficit",
    "beta_ratio",
];

impl SweepTable {
    pub fn is_complete(&self) -> bool {
        self.meta.error.is_none()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let n = self.meta.n;
        let get: fn(&SweepRow, usize) -> f64 = match name {
            "eps" => |r, _| r.eps,
            "volume" => |r, _| r.volume,
            "p_lambda" => |r, _| r.p_lambda,
            "deficit" => |r, _| r.deficit,
            "alpha" => |r, _| r.alpha,
            "beta" => |r, _| r.beta,
            "hausdorff" => |r, _| r.hausdorff,
            "c1_distance" => |r, _| r.c1_distance,
            "r1" => |r, _| r.r1,
            "r2" => |r, _| r.r2,
            "r2_floor" => |r, _| r.r2_floor,
            "raster_deficit" => |r, _| r.raster_deficit,
            "alpha_sq_over_deficit" => |r, _| r.alpha_sq_over_deficit(),
            "beta_ratio" => |r, n| r.beta_ratio(n),
            _ => return None,
        };
        Some(self.rows.iter().map(|r| get(r, n)).collect())
    }

    pub fn to_csv(&self) -> String {
        let cols: Vec<Vec<f64>> = SWEEP_COLUMNS.iter().map(|c| self.column(c).unwrap()).collect();
        let mut s = SWEEP_COLUMNS.join(",");
        s.push('\n');
        for i in 0..self.rows.len() {
            let line: Vec<String> = cols.iter().map(|c| format!("{}", c[i])).collect();
            writeln!(s, "{}", line.join(",")).unwrap();
        }
        s
    }
}

fn sweep_row(params: &CapillarityParams, config: &SweepConfig, eps: f64) -> Result<SweepRow> {
    let spec = PerturbationSpec {
        mode: config.mode,
        amplitude: eps,
        volume_renormalize: config.volume_renormalize,
        nodes: config.nodes,
    };
    let prof = graph_perturbation_family(params, &spec)?;
    let shape = Shape::profile(prof.clone(), params.n);
    let rep = evaluate(&shape, params, &config.search)?;
    let (mut r1, mut r2, mut r2_floor, mut raster_deficit) = (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    if let Some(h) = config.abp_h {
        if params.n != 2 {
            return Err(domain("ABP residuals are available for n = 2 only"));
        }
        let (_, abp) = analyze_domain(&voxelize(&prof, 2, h)?, params, config.xi_step_factor * h)?;
        r1 = abp.r1;
        r2 = abp.r2;
        r2_floor = abp.r2_floor;
        raster_deficit = abp.deficit;
    }
    Ok(SweepRow {
        eps,
        volume: rep.measures.volume,
        p_lambda: rep.p_lambda,
        deficit: rep.deficit,
        alpha: rep.alpha,
        beta: rep.beta,
        hausdorff: rep.hausdorff,
        c1_distance: c1_distance(params, &spec),
        r1,
        r2,
        r2_floor,
        raster_deficit,
    })
}

/// Evaluates the perturbation family at every amplitude of a monotone schedule.
pub fn sweep(params: &CapillarityParams, config: &SweepConfig, schedule: &[f64]) -> Result<SweepTable> {
    let inc = schedule.windows(2).all(|w| w[1] > w[0]);
    let dec = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(domain("the amplitude schedule must be strictly monotone"));
    }
    let results: Vec<Result<SweepRow>> = schedule.par_iter().map(|&e| sweep_row(params, config, e)).collect();
    let mut rows = Vec::new();
    let mut error = None;
    for (r, e) in results.into_iter().zip(schedule) {
        match r {
            Ok(row) => rows.push(row),
            Err(err) => {
                let msg = match err {
                    Error::Generation(m) => m,
                    other => other.to_string(),
                };
                error = Some(format!("ε = {e}: {msg}"));
                break;
            }
        }
    }
    Ok(SweepTable {
        rows,
        meta: SweepMeta { lambda: params.lambda, n: params.n, config: *config, schedule: schedule.to_vec(), error },
    })
}

/// `0.1 · 2^{-k}` for `k = 0..count`.
pub fn geometric_schedule(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * 0.5f64.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fit_loglog;

    #[test]
    fn mode_two_sweep_has_sharp_exponents() {
        let p = CapillarityParams::new(0.3, 2).unwrap();
        let t = sweep(&p, &SweepConfig::default(), &geometric_schedule(0.1, 7)).unwrap();
        assert!(t.is_complete());
        let eps = t.column("eps").unwrap();
        let a = fit_loglog(&eps, &t.column("alpha").unwrap()).unwrap();
        let d = fit_loglog(&eps, &t.column("deficit").unwrap()).unwrap();
        assert!((a.slope - 1.0).abs() < 0.1 && (d.slope - 2.0).abs() < 0.1, "{a:?} {d:?}");
        let band = t.column("alpha_sq_over_deficit").unwrap();
        let (lo, hi) = band.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(lo > 0.0 && hi / lo < 50.0);
        assert!(t.column("beta_ratio").unwrap().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn zero_row_and_csv() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let cfg = SweepConfig { nodes: 4096, ..Default::default() };
        let t = sweep(&p, &cfg, &[0.0, 0.01]).unwrap();
        let r = &t.rows[0];
        assert!(r.deficit <= 1e-6 && r.alpha <= 1e-6 && r.beta <= 1e-6);
        let csv = t.to_csv();
        assert!(csv.starts_with("eps,volume,p_lambda,deficit"));
        assert_eq!(csv.lines().count(), 3);
        assert!(sweep(&p, &cfg, &[0.1, 0.1]).is_err());
    }

    #[test]
    fn failing_amplitude_truncates_the_table() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let cfg = SweepConfig { nodes: 2048, ..Default::default() };
        let t = sweep(&p, &cfg, &[0.01, 0.02, 5.0]).unwrap();
        assert!(!t.is_complete());
        assert_eq!(t.rows.len(), 2);
        assert!(t.meta.error.as_ref().unwrap().contains("ε_max"));
    }
}
