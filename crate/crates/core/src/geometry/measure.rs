use serde::{Deserialize, Serialize};

/// Volume, relative perimeter in `{x_n > 0}` and wetted area on `{x_n = 0}` of a set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureTriple {
    pub volume: f64,
    pub rel_perimeter: f64,
    pub wetted_area: f64,
}

impl MeasureTriple {
    pub fn new(volume: f64, rel_perimeter: f64, wetted_area: f64) -> Self {
        Self { volume, rel_perimeter, wetted_area }
    }

    /// `P(E, {x_n > 0}) - lambda H^{n-1}(∂*E ∩ {x_n = 0})`.
    pub fn capillarity_perimeter(&self, lambda: f64) -> f64 {
        self.rel_perimeter - lambda * self.wetted_area
    }

    /// Measures of the set scaled by `s` in dimension `n`.
    pub fn scaled(&self, s: f64, n: usize) -> Self {
        let a = s.powi(n as i32 - 1);
        Self {
            volume: self.volume * a * s,
            rel_perimeter: self.rel_perimeter * a,
            wetted_area: self.wetted_area * a,
        }
    }
}
