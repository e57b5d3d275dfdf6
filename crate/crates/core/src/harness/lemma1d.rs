use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::FittedConstant;
use crate::error::{domain, Result};
use crate::geometry::CapillarityParams;

/// A finite union of disjoint closed intervals in `[0, ∞)`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval1DSet {
    intervals: Vec<(f64, f64)>,
}

impl Interval1DSet {
    /// Sorts, drops empty intervals and merges overlapping or touching ones.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Result<Self> {
        if raw.iter().any(|&(a, b)| !(a >= 0.0 && b.is_finite() && a <= b)) {
            return Err(domain("intervals must satisfy 0 <= a <= b < ∞"));
        }
        raw.retain(|&(a, b)| b > a);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(Self { intervals: out })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Reduced boundary points. An endpoint at `0` belongs to the boundary of `[0, ∞)`, not of `E`.
    pub fn boundary(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|&(a, b)| [a, b]).filter(|&t| t > 0.0).collect()
    }

    /// `∫_{E ∩ [lo, hi]} t^{n-1} dt`.
    pub fn weighted_measure_in(&self, n: usize, lo: f64, hi: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| monomial(n, a.max(lo), b.min(hi)))
            .sum()
    }

    pub fn weighted_measure(&self, n: usize) -> f64 {
        self.weighted_measure_in(n, 0.0, f64::INFINITY)
    }
}

/// `∫_a^b t^{n-1} dt`, zero when `b <= a`.
fn monomial(n: usize, a: f64, b: f64) -> f64 {
    if b <= a {
        0.0
    } else {
        (b.powi(n as i32) - a.powi(n as i32)) / n as f64
    }
}

/// The two sides of the one-dimensional inequality for `E` against `[0, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1dSides {
    /// `∫_{E Δ [0, l]} t^{n-1} dt`.
    pub lhs: f64,
    /// `∫_{[0, r_λ/2] \ E} t^{n-1} dt + Σ_{∂*E} t^{n-1} |l - t|`.
    pub bracket: f64,
}

impl Lemma1dSides {
    pub fn ratio(&self) -> f64 {
        super::sweep::ratio(self.lhs, self.bracket)
    }
}

pub fn lemma1d_sides(e: &Interval1DSet, n: usize, l: f64, r_small: f64) -> Lemma1dSides {
    let inside = e.weighted_measure_in(n, 0.0, l);
    let lhs = e.weighted_measure(n) + monomial(n, 0.0, l) - 2.0 * inside;
    let half = 0.5 * r_small;
    let gap = monomial(n, 0.0, half) - e.weighted_measure_in(n, 0.0, half);
    let edge: f64 = e.boundary().iter().map(|&t| t.powi(n as i32 - 1) * (l - t).abs()).sum();
    Lemma1dSides { lhs: lhs.max(0.0), bracket: gap.max(0.0) + edge }
}

/// Largest sampled `LHS / bracket` and the stability of that empirical constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma1dRecord {
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub trials: usize,
    pub seed: u64,
    pub constant: FittedConstant,
    pub worst: Interval1DSet,
    pub worst_sides: Lemma1dSides,
}

/// Up to 6 intervals with endpoints uniform in `[0, 3]`. Half of the draws pin the first
/// interval to start at `0`, which makes the `[0, r_λ/2] \ E` term small.
pub fn random_interval_set(rng: &mut ChaCha8Rng) -> Interval1DSet {
    let m = rng.gen_range(0..=6);
    let anchored = rng.gen_bool(0.5);
    let raw: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let a: f64 = rng.gen_range(0.0..3.0);
            let b: f64 = rng.gen_range(0.0..3.0);
            let (a, b) = (a.min(b), a.max(b));
            if i == 0 && anchored {
                (0.0, b)
            } else {
                (a, b)
            }
        })
        .collect();
    Interval1DSet::new(raw).expect("draws are valid")
}

fn batch(n: usize, l: f64, r_small: f64, trials: usize, seed: u64) -> Vec<(f64, Interval1DSet, Lemma1dSides)> {
    // fixed-size chunks with their own streams keep the result independent of the thread count
    const CHUNK: usize = 256;
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(trials - c * CHUNK);
            (0..count)
                .map(|_| {
                    let e = random_interval_set(&mut rng);
                    let s = lemma1d_sides(&e, n, l, r_small);
                    (s.ratio(), e, s)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Brute-force check of the one-dimensional inequality on `trials` random sets, with a held-out
/// batch of the same size drawn from `seed + 1`.
pub fn lemma1d_check(params: &CapillarityParams, l: f64, trials: usize, seed: u64) -> Result<Lemma1dRecord> {
    let lo = 7.0 / 8.0 * params.r_small;
    let hi = 9.0 / 8.0 * params.r_big;
    if !(l >= lo && l <= hi) {
        return Err(domain(format!("l = {l} outside [{lo}, {hi}]")));
    }
    let n = params.n;
    let fit = batch(n, l, params.r_small, trials, seed);
    let held = batch(n, l, params.r_small, trials, seed.wrapping_add(1));
    let fit_ratios: Vec<f64> = fit.iter().map(|r| r.0).collect();
    let held_ratios: Vec<f64> = held.iter().map(|r| r.0).collect();
    let worst = fit
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r.clone())
        .unwrap_or((0.0, Interval1DSet::empty(), lemma1d_sides(&Interval1DSet::empty(), n, l, params.r_small)));
    Ok(Lemma1dRecord {
        lambda: params.lambda,
        n,
        l,
        trials,
        seed,
        constant: FittedConstant::from_batches(&fit_ratios, &held_ratios),
        worst: worst.1,
        worst_sides: worst.2,
    })
}

/// `l` at the two ends and the middle of the admissible range.
pub fn lemma1d_scales(params: &CapillarityParams) -> [f64; 3] {
    let lo = 7.0 / 8.0 * params.r_small;
    let hi = 9.0 / 8.0 * params.r_big;
    [lo, 0.5 * (lo + hi), hi]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn merging_and_boundary() {
        let e = Interval1DSet::new(vec![(1.0, 2.0), (0.0, 0.5), (1.5, 2.5), (2.5, 3.0), (0.7, 0.7)]).unwrap();
        assert_eq!(e.intervals(), &[(0.0, 0.5), (1.0, 3.0)]);
        assert_eq!(e.boundary(), vec![0.5, 1.0, 3.0]);
        assert!(Interval1DSet::new(vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn exact_interval_has_zero_lhs() {
        let l = 0.9;
        let s = lemma1d_sides(&Interval1DSet::new(vec![(0.0, l)]).unwrap(), 3, l, 0.8);
        assert_eq!(s.lhs, 0.0);
        assert_eq!(s.ratio(), 0.0);
    }

    #[test]
    fn half_interval_closed_form() {
        let (n, l, r) = (2, 1.0, 0.8);
        let s = lemma1d_sides(&Interval1DSet::new(vec![(0.0, 0.5 * l)]).unwrap(), n, l, r);
        // E Δ [0, l] = [l/2, l], ∂*E = {l/2}
        assert_relative_eq!(s.lhs, (1.0 - 0.25) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(s.bracket, 0.5 * 0.5, max_relative = 1e-14);
    }

    #[test]
    fn empty_set_bound() {
        for n in [2, 3] {
            let (l, r) = (1.1, 0.9);
            let s = lemma1d_sides(&Interval1DSet::empty(), n, l, r);
            assert_relative_eq!(s.lhs, l.powi(n as i32) / n as f64, max_relative = 1e-14);
            assert!(s.bracket >= (r / 2.0).powi(n as i32) / n as f64 - 1e-15);
            assert!(s.ratio() <= (2.0 * l / r).powi(n as i32) + 1e-12);
        }
    }

    #[test]
    fn check_is_finite_stable_and_deterministic() {
        let p = CapillarityParams::new(0.3, 2).unwrap();
        let [l, _, _] = lemma1d_scales(&p);
        let a = lemma1d_check(&p, l, 2000, 9).unwrap();
        let b = lemma1d_check(&p, l, 2000, 9).unwrap();
        assert!(a.constant.is_stable());
        assert_eq!(a.constant, b.constant);
        assert!(lemma1d_check(&p, 10.0, 10, 0).is_err());
    }
}
