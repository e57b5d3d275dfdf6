//! Run configuration: one flat key-value document, overridable from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use capillarity::harness::{DEFAULT_NODES, FACTOR3_TOL};
use capillarity::{CapillarityParams, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Rep {
    /// Keep whatever representation the input has.
    #[default]
    Auto,
    Profile,
    Voxel,
}

impl FromStr for Rep {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Rep::Auto),
            "profile" => Ok(Rep::Profile),
            "voxel" => Ok(Rep::Voxel),
            _ => Err(format!("unknown representation `{s}` (auto, profile or voxel)")),
        }
    }
}

impl fmt::Display for Rep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rep::Auto => "auto",
            Rep::Profile => "profile",
            Rep::Voxel => "voxel",
        })
    }
}

/// Every knob of a run. Serialized into each manifest so outputs describe themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub n: usize,
    pub rep: Rep,
    /// Profile nodes for generated sets.
    pub nodes: usize,
    /// Voxel spacing for rasterization and the ABP solver.
    pub h: f64,
    /// Conjugate grid spacing as a multiple of `h`.
    pub xi_step_factor: f64,
    pub seed: u64,
    /// Worker cap; 0 means one per core.
    pub jobs: usize,
    pub out: PathBuf,
    /// Relative tolerance of the closed-form bubble identity.
    pub tol_identity: f64,
    /// Allowed negative deficit.
    pub tol_deficit: f64,
    /// Allowed increase of `P_λ` under symmetrization.
    pub tol_monotone: f64,
    /// Minimum fraction of the unit bubble covered by the contact-set gradients.
    pub tol_coverage: f64,
    /// Allowed negative second coupling residual.
    pub tol_residual: f64,
    /// Absolute slack in the factor-3 comparison.
    pub tol_factor3: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            n: 2,
            rep: Rep::Auto,
            nodes: DEFAULT_NODES,
            h: 1.0 / 128.0,
            xi_step_factor: 0.25,
            seed: 0,
            jobs: 0,
            out: PathBuf::from("out"),
            tol_identity: 1e-8,
            tol_deficit: 1e-9,
            tol_monotone: 1e-9,
            tol_coverage: 0.99,
            tol_residual: 1e-8,
            tol_factor3: FACTOR3_TOL,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse { location: format!("{}:{location}", path.display()), message },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    let col = span.start - text[..span.start].rfind('\n').map_or(0, |i| i + 1) + 1;
                    format!("line {line}, column {col}")
                }
                None => "config".to_string(),
            };
            Error::Parse { location, message: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > -1.0 && self.lambda < 1.0) {
            return Err(Error::Domain(format!("lambda = {} outside (-1, 1)", self.lambda)));
        }
        if !(2..=3).contains(&self.n) {
            return Err(Error::Domain(format!("n = {} is not 2 or 3", self.n)));
        }
        if self.nodes < 8 {
            return Err(Error::Domain(format!("nodes = {} is below 8", self.nodes)));
        }
        let positive = [
            ("h", self.h),
            ("xi_step_factor", self.xi_step_factor),
            ("tol_identity", self.tol_identity),
            ("tol_deficit", self.tol_deficit),
            ("tol_monotone", self.tol_monotone),
            ("tol_coverage", self.tol_coverage),
            ("tol_residual", self.tol_residual),
            ("tol_factor3", self.tol_factor3),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        if self.tol_coverage > 1.0 {
            return Err(Error::Domain(format!("tol_coverage = {} exceeds 1", self.tol_coverage)));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<CapillarityParams> {
        CapillarityParams::new(self.lambda, self.n)
    }

    pub fn xi_step(&self) -> f64 {
        self.xi_step_factor * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_is_lossless() {
        let cfg = RunConfig {
            lambda: -0.1 - 0.2,
            n: 3,
            rep: Rep::Voxel,
            h: 1.0 / 3.0,
            seed: u32::MAX as u64 + 7,
            out: PathBuf::from("a dir/with space"),
            tol_deficit: 1e-300,
            ..Default::default()
        };
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("lambda = 0.5\nrep = \"voxel\"\n").unwrap();
        assert_eq!(cfg.lambda, 0.5);
        assert_eq!(cfg.rep, Rep::Voxel);
        assert_eq!(cfg.nodes, DEFAULT_NODES);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(matches!(RunConfig::from_toml("lambda = 1.0"), Err(Error::Domain(_))));
        assert!(matches!(RunConfig::from_toml("tol_identity = 0.0"), Err(Error::Domain(_))));
        match RunConfig::from_toml("n = 2\nlamda = 0.3\n") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 2, column 1"),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }
}
