use serde::{Deserialize, Serialize};

use super::asymmetry::{asymmetry_alpha, asymmetry_beta};
use super::hausdorff::hausdorff_boundary_distance;
use super::perimeter::{check_dim, deficit_from_measures, perimeter_lower_bound};
use super::search::SearchOptions;
use crate::error::{Error, Result};
use crate::geometry::{Bubble, CapillarityParams, MeasureTriple, Shape};

/// All functionals of one set, serialized as a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub measures: MeasureTriple,
    pub p_lambda: f64,
    pub deficit: f64,
    pub alpha: f64,
    pub alpha_center: Vec<f64>,
    pub beta: f64,
    pub beta_center: Vec<f64>,
    pub hausdorff: f64,
}

impl EvalReport {
    /// Checks the sign and range constraints every report must satisfy.
    pub fn check(&self, lambda: f64) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        if !(-1e-12..=2.0 + 1e-12).contains(&self.alpha) {
            return fail(format!("alpha = {} outside [0, 2]", self.alpha));
        }
        if self.deficit < -1.0 {
            return fail(format!("deficit = {} below -1", self.deficit));
        }
        if self.p_lambda < 0.0 {
            return fail(format!("P_λ = {} is negative", self.p_lambda));
        }
        let lower = perimeter_lower_bound(&self.measures, lambda);
        if self.p_lambda < lower - 1e-10 * lower.max(1.0) {
            return fail(format!("P_λ = {} below (1-λ)/2 (P + trace) = {lower}", self.p_lambda));
        }
        Ok(())
    }
}

/// Evaluates every functional of `shape`; the Hausdorff distance is taken to the bubble at the
/// optimal α centre.
pub fn evaluate(shape: &Shape, params: &CapillarityParams, options: &SearchOptions) -> Result<EvalReport> {
    check_dim(shape, params)?;
    let measures = shape.measures();
    let deficit = deficit_from_measures(&measures, params)?;
    let alpha = asymmetry_alpha(shape, params, options)?;
    let beta = asymmetry_beta(shape, params, options)?;
    let bubble = Bubble::new(*params, measures.volume, alpha.center.clone())?;
    let hausdorff = hausdorff_boundary_distance(shape, &bubble)?;
    let report = EvalReport {
        measures,
        p_lambda: measures.capillarity_perimeter(params.lambda),
        deficit,
        alpha: alpha.value,
        alpha_center: alpha.center,
        beta: beta.value,
        beta_center: beta.center,
        hausdorff,
    };
    report.check(params.lambda)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{voxelize, ProfileSet};

    #[test]
    fn flat_json_keys() {
        let p = CapillarityParams::new(0.2, 2).unwrap();
        let prof = ProfileSet::from_bubble(&Bubble::unit(p), 512).unwrap();
        let r = evaluate(&Shape::profile(prof, 2), &p, &SearchOptions::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            ["alpha", "alpha_center", "beta", "beta_center", "deficit", "hausdorff", "p_lambda", "rel_perimeter", "volume", "wetted_area"]
        );
        let back: EvalReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        assert!(r.alpha < 1e-4 && r.deficit.abs() < 1e-4 && r.hausdorff < 1e-2);
    }

    #[test]
    fn voxel_report_is_consistent() {
        let p = CapillarityParams::new(-0.3, 2).unwrap();
        let prof = ProfileSet::from_bubble(&Bubble::unit(p), 512).unwrap();
        let vox = voxelize(&prof, 2, 0.02).unwrap();
        let r = evaluate(&Shape::Voxel(vox), &p, &SearchOptions::default()).unwrap();
        assert!(r.alpha < 0.05, "{}", r.alpha);
        assert!(r.alpha_center[0].abs() < 0.02);
        assert!(r.deficit > 0.0);
        assert!(r.hausdorff < 0.05);
    }

    #[test]
    fn broken_invariants_are_reported() {
        let r = EvalReport {
            measures: MeasureTriple::new(1.0, 1.0, 1.0),
            p_lambda: 0.1,
            deficit: 0.0,
            alpha: 0.0,
            alpha_center: vec![0.0],
            beta: 0.0,
            beta_center: vec![0.0],
            hausdorff: 0.0,
        };
        assert!(matches!(r.check(0.0), Err(Error::Invariant(_))));
    }
}
