use serde::{Deserialize, Serialize};

use super::{omega, Bubble, MeasureTriple};
use crate::error::{validation, Error, Result};
use crate::quad;

/// A Schwarz-symmetric set given by its slice-radius profile `rho(t)`.
///
/// Between consecutive nodes the radius is linear. Two consecutive nodes may
/// share a height, which encodes a horizontal annulus (a step of the profile);
/// steps are not allowed at `t = 0` and at most two nodes share a height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    heights: Vec<f64>,
    radii: Vec<f64>,
}

/// One linear piece of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub r0: f64,
    pub r1: f64,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn is_step(&self) -> bool {
        self.t1 == self.t0
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        if self.is_step() {
            return self.r1;
        }
        let s = ((t - self.t0) / self.len()).clamp(0.0, 1.0);
        self.r0 + (self.r1 - self.r0) * s
    }
}

/// `∫_0^L (a + (b - a) s / L)^k ds` for a linear function, in closed form.
pub(crate) fn linear_power_integral(a: f64, b: f64, len: f64, k: usize) -> f64 {
    if k == 0 {
        return len;
    }
    let mut sum = 0.0;
    let mut ai = 1.0;
    for i in 0..=k {
        sum += ai * b.powi((k - i) as i32);
        ai *= a;
    }
    len * sum / (k + 1) as f64
}

impl ProfileSet {
    pub fn new(heights: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        let p = Self { heights, radii };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let (h, r) = (&self.heights, &self.radii);
        if h.len() != r.len() {
            return Err(validation(format!("{} heights but {} radii", h.len(), r.len())));
        }
        if h.len() < 2 {
            return Err(validation("a profile needs at least two nodes"));
        }
        if h.iter().chain(r.iter()).any(|x| !x.is_finite()) {
            return Err(validation("profile contains non-finite values"));
        }
        if h[0] != 0.0 {
            return Err(validation(format!("profile must start at t = 0, starts at {}", h[0])));
        }
        if h[1] <= 0.0 {
            return Err(validation("profile may not have a step at t = 0"));
        }
        for k in 1..h.len() {
            if h[k] < h[k - 1] {
                return Err(validation(format!("heights decrease at node {k}")));
            }
            if k >= 2 && h[k] == h[k - 1] && h[k - 1] == h[k - 2] {
                return Err(validation(format!("three nodes share height {} at node {k}", h[k])));
            }
        }
        if let Some(k) = r.iter().position(|&x| x < 0.0) {
            return Err(validation(format!("negative radius at node {k}")));
        }
        if *r.last().unwrap() != 0.0 {
            return Err(validation("profile must close at the top (final radius 0)"));
        }
        if r.iter().all(|&x| x == 0.0) {
            return Err(validation("profile has zero volume"));
        }
        Ok(())
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn node_count(&self) -> usize {
        self.heights.len()
    }

    /// Top height `T`.
    pub fn top(&self) -> f64 {
        *self.heights.last().unwrap()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    pub fn base_radius(&self) -> f64 {
        self.radii[0]
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        self.heights.windows(2).zip(self.radii.windows(2)).map(|(h, r)| Piece {
            t0: h[0],
            t1: h[1],
            r0: r[0],
            r1: r[1],
        })
    }

    /// Slice radius at height `t`; zero outside `[0, T]`. At a step the upper value is used.
    pub fn radius_at(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.top() {
            return 0.0;
        }
        let idx = self.heights.partition_point(|&h| h <= t);
        if idx == 0 {
            return self.radii[0];
        }
        let k = idx - 1;
        if k + 1 >= self.heights.len() {
            return self.radii[k];
        }
        let (t0, t1) = (self.heights[k], self.heights[k + 1]);
        let s = (t - t0) / (t1 - t0);
        self.radii[k] + (self.radii[k + 1] - self.radii[k]) * s
    }

    /// `H^{n-1}` of the slice at height `t`.
    pub fn slice_area(&self, t: f64, n: usize) -> f64 {
        omega(n - 1) * self.radius_at(t).powi(n as i32 - 1)
    }

    pub fn volume(&self, n: usize) -> f64 {
        let w = omega(n - 1);
        self.pieces().map(|p| w * linear_power_integral(p.r0, p.r1, p.len(), n - 1)).sum()
    }

    /// Volume from Gauss–Legendre quadrature of the slice areas, piece by piece.
    pub fn volume_by_quadrature(&self, n: usize) -> f64 {
        let gl = quad::gauss_legendre(n.max(2));
        let w = omega(n - 1);
        self.pieces()
            .filter(|p| !p.is_step())
            .map(|p| gl.integrate(p.t0, p.t1, |t| w * p.radius_at(t).powi(n as i32 - 1)))
            .sum()
    }

    /// `|E ∩ {x_n < t}|`.
    pub fn volume_below(&self, t: f64, n: usize) -> f64 {
        let w = omega(n - 1);
        let mut v = 0.0;
        for p in self.pieces() {
            if p.t0 >= t {
                break;
            }
            if p.t1 <= t {
                v += w * linear_power_integral(p.r0, p.r1, p.len(), n - 1);
            } else {
                let c = p.radius_at(t);
                v += w * linear_power_integral(p.r0, c, t - p.t0, n - 1);
            }
        }
        v
    }

    /// Lateral area of a sloped piece or annulus area of a step.
    pub(crate) fn piece_area(p: &Piece, n: usize) -> f64 {
        let w = omega(n - 1);
        if p.is_step() {
            return w * (p.r0.powi(n as i32 - 1) - p.r1.powi(n as i32 - 1)).abs();
        }
        if p.r0 == 0.0 && p.r1 == 0.0 {
            return 0.0;
        }
        let slant = (p.len() * p.len() + (p.r1 - p.r0) * (p.r1 - p.r0)).sqrt();
        // ∫ rho^{n-2} sqrt(1 + rho'^2) dt = slant * mean(rho^{n-2})
        let mean = linear_power_integral(p.r0, p.r1, 1.0, n - 2);
        (n - 1) as f64 * w * slant * mean
    }

    pub fn measures(&self, n: usize) -> MeasureTriple {
        let rel: f64 = self.pieces().map(|p| Self::piece_area(&p, n)).sum();
        MeasureTriple {
            volume: self.volume(n),
            rel_perimeter: rel,
            wetted_area: omega(n - 1) * self.radii[0].powi(n as i32 - 1),
        }
    }

    /// `∫_{∂E ∩ {x_n > 0}} (1 - lambda <e_n, nu>)` with per-piece normals.
    pub fn flux_perimeter(&self, n: usize, lambda: f64) -> f64 {
        let w = omega(n - 1);
        self.pieces()
            .map(|p| {
                let area = Self::piece_area(&p, n);
                if p.is_step() {
                    // annulus facing up when the radius shrinks upward
                    let nu_n = if p.r1 < p.r0 { 1.0 } else { -1.0 };
                    area * (1.0 - lambda * nu_n)
                } else {
                    // outward normal of a cone frustum has e_n-component -rho'/sqrt(1+rho'^2);
                    // integrated against the lateral element this is -omega (r1^{n-1} - r0^{n-1})
                    let k = n as i32 - 1;
                    let flux_n = if p.r0 == 0.0 && p.r1 == 0.0 {
                        0.0
                    } else {
                        -w * (p.r1.powi(k) - p.r0.powi(k))
                    };
                    area - lambda * flux_n
                }
            })
            .sum()
    }

    /// Uniform scaling by `s` about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(crate::error::domain(format!("scale factor must be positive, got {s}")));
        }
        Self::new(
            self.heights.iter().map(|h| h * s).collect(),
            self.radii.iter().map(|r| r * s).collect(),
        )
    }

    /// Cumulative arclength of the generatrix `(rho(t), t)` at each node.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.heights.len());
        let mut acc = 0.0;
        s.push(0.0);
        for k in 1..self.heights.len() {
            acc += (self.heights[k] - self.heights[k - 1]).hypot(self.radii[k] - self.radii[k - 1]);
            s.push(acc);
        }
        s
    }

    /// Scalar mean curvature of the revolved hypersurface at arclength `s` along the generatrix.
    ///
    /// Sign convention: outward normal, so the unit sphere has `H = -(n - 1)`. The generatrix is
    /// fitted by a quadratic through the node nearest to `s` and its two neighbours.
    pub fn mean_curvature(&self, s: f64, n: usize) -> Result<f64> {
        let m = self.heights.len();
        if m < 3 {
            return Err(Error::Singularity("need at least three nodes".into()));
        }
        let arc = self.arclengths();
        let mut near = arc.partition_point(|&a| a < s).min(m - 1);
        if near > 0 && (arc[near - 1] - s).abs() <= (arc[near] - s).abs() {
            near -= 1;
        }
        if self.radii[near] == 0.0 {
            return Err(Error::Singularity(format!("node {near} lies on the axis")));
        }
        let i = near.clamp(1, m - 2);
        let (s0, s1, s2) = (arc[i - 1], arc[i], arc[i + 1]);
        if s1 - s0 <= 0.0 || s2 - s1 <= 0.0 {
            return Err(Error::Singularity(format!("repeated node near {i}")));
        }
        // Lagrange quadratic derivatives at s
        let d0 = (s0 - s1) * (s0 - s2);
        let d1 = (s1 - s0) * (s1 - s2);
        let d2 = (s2 - s0) * (s2 - s1);
        let dl = [
            ((s - s1) + (s - s2)) / d0,
            ((s - s0) + (s - s2)) / d1,
            ((s - s0) + (s - s1)) / d2,
        ];
        let ddl = [2.0 / d0, 2.0 / d1, 2.0 / d2];
        let l = [
            (s - s1) * (s - s2) / d0,
            (s - s0) * (s - s2) / d1,
            (s - s0) * (s - s1) / d2,
        ];
        let a = [self.radii[i - 1], self.radii[i], self.radii[i + 1]];
        let b = [self.heights[i - 1], self.heights[i], self.heights[i + 1]];
        let dot = |w: &[f64; 3], v: &[f64; 3]| w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
        let alpha = dot(&l, &a);
        if alpha <= 0.0 {
            return Err(Error::Singularity(format!("radius vanishes at s = {s}")));
        }
        let (da, db) = (dot(&dl, &a), dot(&dl, &b));
        let (dda, ddb) = (dot(&ddl, &a), dot(&ddl, &b));
        let speed = da.hypot(db);
        // outward unit normal in the meridian plane for a generatrix running upward
        let nu = (db / speed, -da / speed);
        let k_nu = (dda * nu.0 + ddb * nu.1) / (speed * speed);
        Ok(k_nu - (n as f64 - 2.0) * nu.0 / alpha)
    }

    /// Profile of a bubble sampled uniformly in the polar angle about the ball centre.
    pub fn from_bubble(bubble: &Bubble, nodes: usize) -> Result<Self> {
        let nodes = nodes.max(3);
        let s = bubble.scale;
        let c = bubble.ball_center_height;
        let phi0 = bubble.params.lambda.asin();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let mut heights = Vec::with_capacity(nodes);
        let mut radii = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let phi = phi0 + (half_pi - phi0) * k as f64 / (nodes - 1) as f64;
            if k == 0 {
                heights.push(0.0);
                radii.push(bubble.wetted_radius());
            } else if k == nodes - 1 {
                heights.push(bubble.height());
                radii.push(0.0);
            } else {
                heights.push(c + s * phi.sin());
                radii.push(s * phi.cos());
            }
        }
        Self::new(heights, radii)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CapillarityParams;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cone() -> ProfileSet {
        ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn cone_measures() {
        let m = cone().measures(2);
        assert_relative_eq!(m.volume, 1.0, max_relative = 1e-14);
        assert_relative_eq!(m.rel_perimeter, 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(m.wetted_area, 2.0, max_relative = 1e-14);
        let m = cone().measures(3);
        assert_relative_eq!(m.volume, PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(m.rel_perimeter, 2f64.sqrt() * PI, max_relative = 1e-14);
        assert_relative_eq!(m.wetted_area, PI, max_relative = 1e-14);
    }

    #[test]
    fn sampled_half_disk() {
        let p = CapillarityParams::new(0.0, 2).unwrap();
        let b = Bubble::new(p, PI / 2.0, vec![0.0]).unwrap();
        let m = ProfileSet::from_bubble(&b, 4096).unwrap().measures(2);
        assert_relative_eq!(m.volume, PI / 2.0, max_relative = 1e-6);
        assert_relative_eq!(m.rel_perimeter, PI, max_relative = 1e-6);
        assert_relative_eq!(m.wetted_area, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_volume_agrees() {
        let p = CapillarityParams::new(0.3, 4).unwrap();
        let prof = ProfileSet::from_bubble(&Bubble::unit(p), 500).unwrap();
        for n in 2..=4 {
            assert_relative_eq!(prof.volume(n), prof.volume_by_quadrature(n), max_relative = 1e-12);
        }
    }

    #[test]
    fn steps_count_as_annuli() {
        // unit-width column of height 1 with a wider base row: stepped profile
        let p = ProfileSet::new(vec![0.0, 1.0, 1.0, 2.0, 2.0], vec![2.0, 2.0, 1.0, 1.0, 0.0]).unwrap();
        let m = p.measures(2);
        assert_relative_eq!(m.volume, 4.0 + 2.0);
        // sides 1 + 1 + 1 + 1, two horizontal ledges of length 1, top of length 2
        assert_relative_eq!(m.rel_perimeter, 4.0 + 2.0 + 2.0);
        assert_relative_eq!(m.wetted_area, 4.0);
        let lambda = 0.4;
        assert_relative_eq!(p.flux_perimeter(2, lambda), m.capillarity_perimeter(lambda), max_relative = 1e-14);
    }

    #[test]
    fn flux_matches_on_cone() {
        let m = cone().measures(2);
        assert_relative_eq!(cone().flux_perimeter(2, 0.5), 2.0 * 2f64.sqrt() - 1.0, max_relative = 1e-14);
        assert_relative_eq!(m.capillarity_perimeter(0.5), 2.0 * 2f64.sqrt() - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(ProfileSet::new(vec![0.0, 1.0], vec![1.0, 0.5]).is_err());
        assert!(ProfileSet::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 0.0]).is_err());
        assert!(ProfileSet::new(vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0]).is_err());
        assert!(ProfileSet::new(vec![0.0, 1.0], vec![-1.0, 0.0]).is_err());
        assert!(ProfileSet::new(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(ProfileSet::new(vec![0.0, 1.0, 1.0, 1.0], vec![1.0, 1.0, 0.5, 0.0]).is_err());
    }

    #[test]
    fn radius_lookup_and_volume_below() {
        let c = cone();
        assert_relative_eq!(c.radius_at(0.25), 0.75);
        assert_eq!(c.radius_at(1.5), 0.0);
        // triangle area below t in n = 2: 2t - t^2
        assert_relative_eq!(c.volume_below(0.5, 2), 0.75, max_relative = 1e-14);
        assert_relative_eq!(c.volume_below(3.0, 2), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn sphere_and_cylinder_curvature() {
        let r: f64 = 1.7;
        let p = CapillarityParams::new(0.0, 3).unwrap();
        let v = p.cap_volume * r.powi(3);
        let prof = ProfileSet::from_bubble(&Bubble::centered(p, v).unwrap(), 2000).unwrap();
        let arc = prof.arclengths();
        for frac in [0.1, 0.4, 0.8] {
            let h = prof.mean_curvature(arc.last().unwrap() * frac, 3).unwrap();
            assert!((h + 2.0 / r).abs() < 1e-3, "H = {h}");
        }
        let cyl = ProfileSet::new(vec![0.0, 0.5, 1.0, 1.5, 1.5], vec![r, r, r, r, 0.0]).unwrap();
        let h3 = cyl.mean_curvature(0.5, 3).unwrap();
        assert_relative_eq!(h3.abs(), 1.0 / r, max_relative = 1e-12);
        assert!(cyl.mean_curvature(0.5, 2).unwrap().abs() < 1e-12);
        // the closing node sits on the axis
        let top = *cyl.arclengths().last().unwrap();
        assert!(matches!(cyl.mean_curvature(top, 3), Err(Error::Singularity(_))));
    }
}
