//! Minimization over wall-parallel translations: coarse grid scan plus golden-section polish.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Maximum number of coarse samples per wall axis.
    pub coarse_per_axis: usize,
    /// Width of the scan window in units of the bubble scale.
    pub window: f64,
    /// Golden-section termination in units of the bubble scale.
    pub rel_tol: f64,
    /// Number of coarse minima polished independently.
    pub starts: usize,
    pub max_evals: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { coarse_per_axis: 33, window: 4.0, rel_tol: 1e-4, starts: 3, max_evals: 20_000 }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

struct Counter<'a> {
    used: AtomicUsize,
    budget: usize,
    f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

impl Counter<'_> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.used.fetch_add(1, Ordering::Relaxed);
        (self.f)(x)
    }

    fn exhausted(&self) -> bool {
        self.used.load(Ordering::Relaxed) > self.budget
    }
}

fn golden(c: &Counter, x: &mut Vec<f64>, fx: &mut f64, axis: usize, half_width: f64, tol: f64) {
    let base = x[axis];
    let at = |t: f64| {
        let mut y = x.clone();
        y[axis] = t;
        c.eval(&y)
    };
    let (mut a, mut b) = (base - half_width, base + half_width);
    let mut p = b - INV_PHI * (b - a);
    let mut q = a + INV_PHI * (b - a);
    let mut fp = at(p);
    let mut fq = at(q);
    while b - a > tol {
        if fp <= fq {
            b = q;
            q = p;
            fq = fp;
            p = b - INV_PHI * (b - a);
            fp = at(p);
        } else {
            a = p;
            p = q;
            fp = fq;
            q = a + INV_PHI * (b - a);
            fq = at(q);
        }
    }
    let (t, ft) = if fp <= fq { (p, fp) } else { (q, fq) };
    if ft < *fx {
        x[axis] = t;
        *fx = ft;
    }
}

/// Minimize `f` over `R^d` (`d = center.len()`), scanning a cube of side `options.window * scale`
/// about `center` at spacing no finer than `h`, then polishing the best `starts` samples.
///
/// Candidates are evaluated in a fixed lexicographic order; ties keep the earlier candidate.
pub fn minimize_translation<F>(center: &[f64], scale: f64, h: f64, options: &SearchOptions, f: F) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = center.len();
    let counter = Counter { used: AtomicUsize::new(0), budget: options.max_evals, f: &f };
    let width = options.window * scale;
    let mut count = options.coarse_per_axis.max(2);
    if h > 0.0 {
        count = count.min((width / h).ceil() as usize + 1).max(2);
    }
    let step = width / (count - 1) as f64;
    let total = count.pow(d as u32);
    let candidates: Vec<Vec<f64>> = (0..total)
        .map(|mut flat| {
            let mut x = vec![0.0; d];
            for k in (0..d).rev() {
                let i = flat % count;
                flat /= count;
                x[k] = center[k] - 0.5 * width + i as f64 * step;
            }
            x
        })
        .collect();
    let values: Vec<f64> = candidates.par_iter().map(|x| counter.eval(x)).collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let tol = options.rel_tol * scale;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &start in order.iter().take(options.starts.max(1)) {
        let mut x = candidates[start].clone();
        let mut fx = values[start];
        for _cycle in 0..12 {
            let before = fx;
            for axis in 0..d {
                golden(&counter, &mut x, &mut fx, axis, step, tol);
            }
            if d == 1 || before - fx <= 1e-15 * before.abs().max(1e-300) {
                break;
            }
            if counter.exhausted() {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    let best = best.expect("at least one start");
    if counter.exhausted() {
        return Err(Error::Search {
            message: format!("translation search exceeded {} evaluations", options.max_evals),
            best_value: best.1,
        });
    }
    Ok(best)
}
