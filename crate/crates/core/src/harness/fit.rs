use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(domain("x and y have different lengths"));
    }
    if x.len() < 4 {
        return Err(domain(format!("need at least 4 points, got {}", x.len())));
    }
    if let Some((a, b)) = x.iter().zip(y).find(|(a, b)| !(**a > 0.0 && **b > 0.0)) {
        return Err(domain(format!("log-log fit needs positive data, got ({a}, {b})")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("all x values are equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    Ok(LogLogFit { slope, intercept, stderr, points: x.len() })
}

/// An empirical constant: the maximum of a ratio over a fitting batch, checked on a held-out batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub fitted: f64,
    pub held_out: f64,
    /// Allowed `held_out / fitted`.
    pub factor: f64,
}

pub const HOLDOUT_FACTOR: f64 = 3.0;

impl FittedConstant {
    /// Maxima of the two batches. Non-finite entries are kept, so they fail [`Self::is_stable`].
    pub fn from_batches(fit: &[f64], held_out: &[f64]) -> Self {
        let max = |v: &[f64]| v.iter().fold(0.0f64, |a, &b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
        Self { fitted: max(fit), held_out: max(held_out), factor: HOLDOUT_FACTOR }
    }

    /// Fit on the even positions, validate on the odd ones.
    pub fn split_halves(values: &[f64]) -> Self {
        let a: Vec<f64> = values.iter().step_by(2).copied().collect();
        let b: Vec<f64> = values.iter().skip(1).step_by(2).copied().collect();
        Self::from_batches(&a, &b)
    }

    pub fn is_stable(&self) -> bool {
        self.fitted.is_finite() && self.held_out.is_finite() && self.held_out <= self.factor * self.fitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8, 1.6];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        let f = fit_loglog(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.stderr < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn fitted_constant() {
        let c = FittedConstant::split_halves(&[1.0, 2.0, 0.5, 2.5]);
        assert_eq!((c.fitted, c.held_out), (1.0, 2.5));
        assert!(c.is_stable());
        assert!(!FittedConstant::from_batches(&[1.0], &[3.5]).is_stable());
        assert!(!FittedConstant::from_batches(&[1.0, f64::NAN], &[0.5]).is_stable());
        assert!(!FittedConstant::from_batches(&[1.0], &[f64::INFINITY]).is_stable());
    }

    proptest! {
        #[test]
        fn slope_recovers_exponent(p in -3.0..3.0f64, c in 0.1..10.0f64) {
            let x: Vec<f64> = (1..8).map(|k| k as f64 * 0.3).collect();
            let y: Vec<f64> = x.iter().map(|v| c * v.powf(p)).collect();
            prop_assert!((fit_loglog(&x, &y).unwrap().slope - p).abs() < 1e-9);
        }
    }
}
