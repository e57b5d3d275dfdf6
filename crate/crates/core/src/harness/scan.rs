use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{item_rng, mixed_member, near_bubble_profile, CorpusKind};
use super::fit::FittedConstant;
use super::sweep::ratio;
use crate::error::Result;
use crate::functionals::{asymmetry_alpha, asymmetry_beta, deficit, hausdorff_boundary_distance, SearchOptions};
use crate::geometry::{Bubble, CapillarityParams, Shape};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaRow {
    pub kind: String,
    pub deficit: f64,
    pub beta: f64,
    /// `β / max(D, D^{1/(2n)})`, with `0/0 = 0`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaScan {
    pub lambda: f64,
    pub n: usize,
    pub seed: u64,
    pub fit: Vec<BetaRow>,
    pub held_out: Vec<BetaRow>,
    pub constant: FittedConstant,
}

fn kind_name(k: CorpusKind) -> &'static str {
    match k {
        CorpusKind::NearBubble => "near_bubble",
        CorpusKind::DetachedDroplet => "detached_droplet",
        CorpusKind::TallColumn => "tall_column",
        CorpusKind::Cone => "cone",
        CorpusKind::Random => "random",
    }
}

fn beta_rows(params: &CapillarityParams, count: usize, seed: u64, nodes: usize) -> Result<Vec<BetaRow>> {
    let opts = SearchOptions::default();
    let n = params.n;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (kind, prof) = mixed_member(&mut item_rng(seed, i), params, nodes);
            let s = Shape::profile(prof, n);
            let d = deficit(&s, params)?;
            let b = asymmetry_beta(&s, params, &opts)?.value;
            let den = if d > 0.0 { d.max(d.powf(1.0 / (2.0 * n as f64))) } else { d };
            Ok(BetaRow { kind: kind_name(kind).into(), deficit: d, beta: b, ratio: ratio(b, den) })
        })
        .collect()
}

/// `β / max(D, D^{1/(2n)})` on a mixed profile corpus of `count` sets, fitted, and validated on a
/// second corpus of the same size drawn from `seed + 1`.
pub fn deficit_beta_scan(params: &CapillarityParams, count: usize, seed: u64, nodes: usize) -> Result<BetaScan> {
    let fit = beta_rows(params, count, seed, nodes)?;
    let held_out = beta_rows(params, count, seed.wrapping_add(1), nodes)?;
    let constant = FittedConstant::from_batches(
        &fit.iter().map(|r| r.ratio).collect::<Vec<_>>(),
        &held_out.iter().map(|r| r.ratio).collect::<Vec<_>>(),
    );
    Ok(BetaScan { lambda: params.lambda, n: params.n, seed, fit, held_out, constant })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HausdorffRow {
    pub alpha: f64,
    pub hausdorff: f64,
    /// `d_H / α^{1/n}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HausdorffScaling {
    pub lambda: f64,
    pub n: usize,
    pub seed: u64,
    pub fit: Vec<HausdorffRow>,
    pub held_out: Vec<HausdorffRow>,
    pub constant: FittedConstant,
}

fn hausdorff_rows(params: &CapillarityParams, count: usize, seed: u64, nodes: usize) -> Result<Vec<HausdorffRow>> {
    let opts = SearchOptions::default();
    let n = params.n;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(seed, i);
            let amp = 10f64.powf(rand::Rng::gen_range(&mut rng, -3.0..-1.0));
            let s = Shape::profile(near_bubble_profile(&mut rng, params, amp, nodes), n);
            let a = asymmetry_alpha(&s, params, &opts)?;
            let bubble = Bubble::new(*params, s.volume(), a.center.clone())?;
            let d = hausdorff_boundary_distance(&s, &bubble)?;
            Ok(HausdorffRow { alpha: a.value, hausdorff: d, ratio: ratio(d, a.value.powf(1.0 / n as f64)) })
        })
        .collect()
}

/// `d_H(∂E, ∂B) / α^{1/n}` on near-bubble profiles, fitted and validated on a held-out corpus.
pub fn hausdorff_scaling(params: &CapillarityParams, count: usize, seed: u64, nodes: usize) -> Result<HausdorffScaling> {
    let fit = hausdorff_rows(params, count, seed, nodes)?;
    let held_out = hausdorff_rows(params, count, seed.wrapping_add(1), nodes)?;
    let constant = FittedConstant::from_batches(
        &fit.iter().map(|r| r.ratio).collect::<Vec<_>>(),
        &held_out.iter().map(|r| r.ratio).collect::<Vec<_>>(),
    );
    Ok(HausdorffScaling { lambda: params.lambda, n: params.n, seed, fit, held_out, constant })
}
