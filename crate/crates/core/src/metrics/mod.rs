//! Distances between angular measures and divergences between densities,
//! and the harness for consistency experiments.

mod angular;
mod divergence;
mod experiment;
pub mod plot;

pub use angular::{ks_angular2, l1_angular, pickands_sup2, weights_l1, KS_GRID};
pub use divergence::{hellinger_mc, kl_mc, total_variation_mc, DensityModel, McEstimate};
pub use experiment::{
    example_truth_margins, run_experiment, CellResult, ExperimentConfig, Generator, Metric, MetricReport, Trajectory,
};
