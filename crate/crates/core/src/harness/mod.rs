//! Perturbation families, sweeps, fitted constants and brute-force checks of the discrete lemmas.

pub mod corpus;
mod factor3;
mod fit;
mod lemma1d;
mod perturb;
mod scan;
mod sweep;

pub use perturb::{
    bubble_radial_graph, c1_distance, epsilon_max, graph_perturbation_family, PerturbationMode, PerturbationSpec,
    DEFAULT_NODES,
};
pub use fit::{fit_loglog, FittedConstant, LogLogFit, HOLDOUT_FACTOR};
pub use sweep::{geometric_schedule, ratio, sweep, SweepConfig, SweepMeta, SweepRow, SweepTable, SWEEP_COLUMNS};
pub use lemma1d::{lemma1d_check, lemma1d_scales, lemma1d_sides, random_interval_set, Interval1DSet, Lemma1dRecord, Lemma1dSides};
pub use factor3::{factor3_check, Factor3Item, Factor3Record, FACTOR3_TOL};
pub use scan::{deficit_beta_scan, hausdorff_scaling, BetaRow, BetaScan, HausdorffRow, HausdorffScaling};
