use serde::{Deserialize, Serialize};

use super::{omega, CapillarityParams, MeasureTriple};
use crate::error::{domain, Result};

/// An optimal bubble: the ball of radius `scale` centred at `(center, -scale * lambda)`
/// intersected with the open half-space `{x_n > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    pub params: CapillarityParams,
    pub volume: f64,
    /// Position on the wall, `n - 1` coordinates.
    pub center: Vec<f64>,
    pub scale: f64,
    pub ball_center_height: f64,
}

impl Bubble {
    pub fn new(params: CapillarityParams, volume: f64, center: Vec<f64>) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(domain(format!("bubble volume must be positive, got {volume}")));
        }
        if center.len() != params.n - 1 {
            return Err(domain(format!(
                "bubble center needs {} wall coordinates, got {}",
                params.n - 1,
                center.len()
            )));
        }
        let scale = params.scale_for_volume(volume);
        Ok(Self { params, volume, center, scale, ball_center_height: -scale * params.lambda })
    }

    /// The bubble with volume `|B^λ|` centred at the origin.
    pub fn unit(params: CapillarityParams) -> Self {
        Self::new(params, params.cap_volume, vec![0.0; params.n - 1]).expect("unit bubble is valid")
    }

    /// Centered bubble with the given volume.
    pub fn centered(params: CapillarityParams, volume: f64) -> Result<Self> {
        Self::new(params, volume, vec![0.0; params.n - 1])
    }

    pub fn dim(&self) -> usize {
        self.params.n
    }

    /// Full centre of the underlying ball in `R^n`.
    pub fn ball_center(&self) -> Vec<f64> {
        let mut c = self.center.clone();
        c.push(self.ball_center_height);
        c
    }

    /// Radius of the wetted disk `scale * sqrt(1 - lambda^2)`.
    pub fn wetted_radius(&self) -> f64 {
        self.scale * self.params.wetted_radius
    }

    /// Height of the apex, `scale * (1 - lambda)`.
    pub fn height(&self) -> f64 {
        self.scale * (1.0 - self.params.lambda)
    }

    /// Volume recomputed from the scale.
    pub fn volume_from_scale(&self) -> f64 {
        self.params.cap_volume * self.scale.powi(self.params.n as i32)
    }

    pub fn measures(&self) -> MeasureTriple {
        let n = self.params.n as i32;
        let a = self.scale.powi(n - 1);
        MeasureTriple {
            volume: self.volume,
            rel_perimeter: a * self.params.cap_rel_perimeter,
            wetted_area: a * omega(self.params.n - 1) * self.params.wetted_radius.powi(n - 1),
        }
    }

    /// Radius of the horizontal slice at height `t`, zero outside the bubble.
    pub fn slice_radius(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let dz = t - self.ball_center_height;
        let r2 = self.scale * self.scale - dz * dz;
        if r2 > 0.0 {
            r2.sqrt()
        } else {
            0.0
        }
    }

    /// Whether `x` (full `n` coordinates) lies in the open bubble.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x[self.params.n - 1] <= 0.0 {
            return false;
        }
        let c = self.ball_center();
        let d2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 < self.scale * self.scale
    }

    /// Distance from `x` to the closure of the relative boundary (the spherical cap surface).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let n = self.params.n;
        let c = self.ball_center();
        let diff: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
        let r = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
        // radial projection onto the sphere
        let proj_height = if r > 0.0 {
            c[n - 1] + self.scale * diff[n - 1] / r
        } else {
            self.height()
        };
        if proj_height >= 0.0 {
            if r > 0.0 {
                (r - self.scale).abs()
            } else {
                self.scale
            }
        } else {
            // nearest point is on the rim {x_n = 0, |x' - center| = wetted radius}
            let rw = self.wetted_radius();
            let horiz: f64 = diff[..n - 1].iter().map(|d| d * d).sum::<f64>().sqrt();
            let dr = horiz - rw;
            let dz = x[n - 1];
            (dr * dr + dz * dz).sqrt()
        }
    }
}
