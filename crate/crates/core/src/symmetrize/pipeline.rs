use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{normalize, reduce_to_symmetric, schwarz_symmetrize, truncate_and_rescale, SymmetryRecord, TruncationRecord};
use crate::error::{domain, Error, Result};
use crate::functionals::{asymmetry_alpha, deficit, SearchOptions};
use crate::geometry::{CapillarityParams, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Normalize,
    Truncate,
    Reflect,
    Schwarz,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Normalize, Stage::Truncate, Stage::Reflect, Stage::Schwarz];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Normalize => "normalize",
            Stage::Truncate => "truncate",
            Stage::Reflect => "reflect",
            Stage::Schwarz => "schwarz",
        }
    }

    /// Parses a comma-separated stage list such as `normalize,truncate`.
    pub fn parse_list(s: &str) -> Result<Vec<Stage>> {
        s.split(',').map(|t| t.trim()).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Parse { location: "stages".into(), message: format!("unknown stage `{s}`") })
    }
}

/// Functionals after one stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: String,
    pub representation: String,
    pub volume: f64,
    pub p_lambda: f64,
    pub deficit: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub rows: Vec<StageRow>,
    pub truncation: Option<TruncationRecord>,
    pub symmetry: Option<SymmetryRecord>,
    /// `D(after) / D(before)` for each stage that changes the deficit.
    pub deficit_ratios: Vec<(String, f64)>,
    /// `(α(before) - α(after)) / D(before)` for each stage.
    pub alpha_slopes: Vec<(String, f64)>,
}

impl PipelineReport {
    /// Fixed-width table of the stage rows.
    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>8} {:>14} {:>14} {:>12} {:>12}\n", "stage", "kind", "volume", "P_lambda", "D", "alpha");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>8} {:>14.8} {:>14.8} {:>12.4e} {:>12.4e}\n",
                r.stage, r.representation, r.volume, r.p_lambda, r.deficit, r.alpha
            ));
        }
        out
    }
}

fn row(stage: &str, shape: &Shape, params: &CapillarityParams, options: &SearchOptions) -> Result<StageRow> {
    let m = shape.measures();
    Ok(StageRow {
        stage: stage.to_string(),
        representation: shape.kind().to_string(),
        volume: m.volume,
        p_lambda: m.capillarity_perimeter(params.lambda),
        deficit: deficit(shape, params)?,
        alpha: asymmetry_alpha(shape, params, options)?.value,
    })
}

/// Runs the requested reduction stages in order, evaluating volume, `P_λ`, `D` and `α` after each.
pub fn run_pipeline(
    shape: &Shape,
    params: &CapillarityParams,
    stages: &[Stage],
    options: &SearchOptions,
) -> Result<(Shape, PipelineReport)> {
    if shape.dim() != params.n {
        return Err(domain(format!("set has dimension {}, parameters have n = {}", shape.dim(), params.n)));
    }
    let mut report = PipelineReport {
        rows: vec![row("input", shape, params, options)?],
        truncation: None,
        symmetry: None,
        deficit_ratios: vec![],
        alpha_slopes: vec![],
    };
    let mut current = shape.clone();
    for &stage in stages {
        let next = match stage {
            Stage::Normalize => normalize(&current, params.cap_volume)?,
            Stage::Truncate => {
                let (out, rec) = truncate_and_rescale(&current, params)?;
                report.truncation = Some(rec);
                out
            }
            Stage::Reflect => match &current {
                Shape::Voxel(v) => {
                    let (out, rec) = reduce_to_symmetric(v, params, options)?;
                    report.symmetry = Some(rec);
                    Shape::Voxel(out)
                }
                Shape::Profile { .. } => current.clone(),
            },
            Stage::Schwarz => match &current {
                Shape::Voxel(v) => Shape::profile(schwarz_symmetrize(v)?, params.n),
                Shape::Profile { .. } => current.clone(),
            },
        };
        let prev = report.rows.last().unwrap().clone();
        let r = row(stage.name(), &next, params, options)?;
        if prev.deficit > 0.0 {
            report.deficit_ratios.push((stage.name().into(), r.deficit / prev.deficit));
            report.alpha_slopes.push((stage.name().into(), (prev.alpha - r.alpha) / prev.deficit));
        }
        report.rows.push(r);
        current = next;
    }
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetrize::truncate::tests::rectangle_with_blob;
    use approx::assert_relative_eq;

    #[test]
    fn stage_lists_parse() {
        assert_eq!(Stage::parse_list("normalize,truncate, schwarz").unwrap(), vec![Stage::Normalize, Stage::Truncate, Stage::Schwarz]);
        assert!(Stage::parse_list("normalize,melt").is_err());
    }

    #[test]
    fn full_pipeline_on_a_rectangle_with_a_blob() {
        let (v, p) = rectangle_with_blob();
        let shape = Shape::Voxel(v.scaled(1.3).unwrap());
        let opts = SearchOptions::default();
        let (out, rep) = run_pipeline(&shape, &p, &Stage::ALL, &opts).unwrap();
        assert_eq!(rep.rows.len(), 5);
        assert!(matches!(out, Shape::Profile { .. }));
        assert_relative_eq!(out.volume(), p.cap_volume, max_relative = 1e-9);
        let ds: Vec<f64> = rep.rows.iter().map(|r| r.deficit).collect();
        // truncation removes the blob, Schwarz symmetrization does not raise P_λ
        assert!(ds[2] < ds[1]);
        assert!(ds[4] <= ds[3] + 1e-9);
        let sym = rep.symmetry.as_ref().unwrap();
        assert!(sym.steps.iter().all(|s| s.doubling_bound_holds));
        assert!(rep.table().lines().count() == 6);
    }
}
