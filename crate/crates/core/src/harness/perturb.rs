use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CapillarityParams, ProfileSet};

/// Shape of the radial perturbation `ψ(cos θ)`, with `θ` the angle from the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// Legendre polynomial `P_k(cos θ)`, `k >= 1`.
    Legendre(usize),
    /// `exp(-(cos θ / 0.2)²)`, concentrated next to the contact line.
    WettedBump,
}

impl PerturbationMode {
    pub fn eval(&self, c: f64) -> f64 {
        match *self {
            PerturbationMode::Legendre(k) => legendre_p(k, c),
            PerturbationMode::WettedBump => (-(c / 0.2).powi(2)).exp(),
        }
    }

    fn derivative(&self, c: f64) -> f64 {
        let e = 1e-6;
        (self.eval(c + e) - self.eval(c - e)) / (2.0 * e)
    }
}

impl std::str::FromStr for PerturbationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "bump" || s == "wetted_bump" {
            return Ok(PerturbationMode::WettedBump);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(PerturbationMode::Legendre(k)),
            _ => Err(Error::Parse { location: "mode".into(), message: format!("expected a mode index >= 1 or `bump`, got `{s}`") }),
        }
    }
}

fn legendre_p(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return p0;
    }
    for m in 1..k {
        let m = m as f64;
        let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub mode: PerturbationMode,
    pub amplitude: f64,
    pub volume_renormalize: bool,
    pub nodes: usize,
}

impl PerturbationSpec {
    pub fn new(mode: PerturbationMode, amplitude: f64) -> Self {
        Self { mode, amplitude, volume_renormalize: true, nodes: DEFAULT_NODES }
    }
}

pub const DEFAULT_NODES: usize = 16384;

/// Radius of the unit bubble boundary in direction `θ` from the origin, `c = cos θ`.
pub fn bubble_radial_graph(lambda: f64, c: f64) -> f64 {
    -lambda * c + (lambda * lambda * c * c + 1.0 - lambda * lambda).sqrt()
}

fn bubble_radial_derivative(lambda: f64, c: f64) -> f64 {
    let s = (lambda * lambda * c * c + 1.0 - lambda * lambda).sqrt();
    -lambda + lambda * lambda * c / s
}

/// Samples `(t, ρ)` of `r(θ) = φ_λ(cos θ)(1 + ε ψ(cos θ))` from the wall (`θ = π/2`) to the apex.
fn radial_profile(params: &CapillarityParams, spec: &PerturbationSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = spec.nodes.max(8);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut heights = Vec::with_capacity(m);
    let mut radii = Vec::with_capacity(m);
    for k in 0..m {
        let theta = half_pi * (1.0 - k as f64 / (m - 1) as f64);
        let c = if k == 0 { 0.0 } else { theta.cos() };
        let r = bubble_radial_graph(params.lambda, c) * (1.0 + spec.amplitude * spec.mode.eval(c));
        if !(r > 0.0) {
            return Err(Error::Generation(format!("radius {r} at θ = {theta}")));
        }
        let (t, rho) = if k == 0 { (0.0, r) } else if k == m - 1 { (r, 0.0) } else { (r * c, r * theta.sin()) };
        if let Some(&last) = heights.last() {
            if t <= last {
                return Err(Error::Generation(format!("profile is not a graph over the axis near θ = {theta}")));
            }
        }
        heights.push(t);
        radii.push(rho);
    }
    Ok((heights, radii))
}

/// Largest amplitude (to 1e-6 relative, capped at 4) for which the family stays a valid profile.
pub fn epsilon_max(params: &CapillarityParams, mode: PerturbationMode, nodes: usize) -> f64 {
    let ok = |e: f64| radial_profile(params, &PerturbationSpec { mode, amplitude: e, volume_renormalize: false, nodes }).is_ok();
    let mut hi = 4.0;
    if ok(hi) {
        return hi;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The perturbed bubble `{r < φ_λ(1 + ε ψ)}` as a profile, rescaled to volume `|B^λ|` when asked.
pub fn graph_perturbation_family(params: &CapillarityParams, spec: &PerturbationSpec) -> Result<ProfileSet> {
    if spec.amplitude < 0.0 || !spec.amplitude.is_finite() {
        return Err(Error::Domain(format!("amplitude must be nonnegative, got {}", spec.amplitude)));
    }
    let (h, r) = radial_profile(params, spec).map_err(|e| {
        let emax = epsilon_max(params, spec.mode, spec.nodes);
        let e = match e {
            Error::Generation(m) => m,
            other => other.to_string(),
        };
        Error::Generation(format!("{e}; ε_max = {emax:.6} for mode {:?}", spec.mode))
    })?;
    let p = ProfileSet::new(h, r)?;
    if spec.volume_renormalize {
        let s = (params.cap_volume / p.volume(params.n)).powf(1.0 / params.n as f64);
        p.scaled(s)
    } else {
        Ok(p)
    }
}

/// `sup |ε φ_λ ψ| + sup |d/dθ (ε φ_λ ψ)|` over the half sphere, sampled at the family's nodes.
pub fn c1_distance(params: &CapillarityParams, spec: &PerturbationSpec) -> f64 {
    let m = spec.nodes.max(8);
    let l = params.lambda;
    let mut sup0: f64 = 0.0;
    let mut sup1: f64 = 0.0;
    for k in 0..m {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (m - 1) as f64;
        let (c, s) = (theta.cos(), theta.sin());
        let f = bubble_radial_graph(l, c);
        let g = spec.mode.eval(c);
        let df = -s * bubble_radial_derivative(l, c);
        let dg = -s * spec.mode.derivative(c);
        sup0 = sup0.max((f * g).abs());
        sup1 = sup1.max((df * g + f * dg).abs());
    }
    spec.amplitude * (sup0 + sup1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::deficit;
    use crate::geometry::{Bubble, Shape};
    use approx::assert_relative_eq;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(2, 0.5), -0.125);
        assert_relative_eq!(legendre_p(3, 0.3), 0.5 * (5.0 * 0.027 - 0.9), max_relative = 1e-14);
    }

    #[test]
    fn radial_graph_lies_on_the_sphere() {
        for l in [-0.7, 0.0, 0.4] {
            for c in [0.0, 0.3, 1.0] {
                let r = bubble_radial_graph(l, c);
                let s = (1.0 - c * c).sqrt();
                assert_relative_eq!((r * s).powi(2) + (r * c + l).powi(2), 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn zero_amplitude_is_the_bubble() {
        for &(l, n) in &[(0.0, 2), (0.5, 3), (-0.3, 2)] {
            let p = CapillarityParams::new(l, n).unwrap();
            let prof = graph_perturbation_family(&p, &PerturbationSpec::new(PerturbationMode::Legendre(2), 0.0)).unwrap();
            let s = Shape::profile(prof.clone(), n);
            assert!(deficit(&s, &p).unwrap() <= 1e-8);
            assert_relative_eq!(prof.top(), Bubble::unit(p).height(), max_relative = 1e-9);
        }
    }

    #[test]
    fn renormalized_volume() {
        let p = CapillarityParams::new(0.2, 3).unwrap();
        for e in [0.01, 0.1, 0.3] {
            let prof = graph_perturbation_family(&p, &PerturbationSpec::new(PerturbationMode::Legendre(2), e)).unwrap();
            assert_relative_eq!(prof.volume(3), p.cap_volume, max_relative = 1e-9);
        }
    }

    #[test]
    fn too_large_amplitude_names_the_limit() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let emax = epsilon_max(&p, PerturbationMode::Legendre(4), 4096);
        assert!(emax > 0.05 && emax < 4.0, "{emax}");
        let spec = PerturbationSpec { nodes: 4096, ..PerturbationSpec::new(PerturbationMode::Legendre(4), 1.1 * emax) };
        match graph_perturbation_family(&p, &spec) {
            Err(Error::Generation(msg)) => assert!(msg.contains("ε_max")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn c1_distance_is_linear() {
        let p = CapillarityParams::new(0.3, 2).unwrap();
        let a = c1_distance(&p, &PerturbationSpec::new(PerturbationMode::Legendre(2), 0.01));
        let b = c1_distance(&p, &PerturbationSpec::new(PerturbationMode::Legendre(2), 0.02));
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
    }
}
