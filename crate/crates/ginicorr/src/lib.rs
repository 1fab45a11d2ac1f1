//! Estimation and inference for the categorical Gini correlation: the
//! strength of association between a numeric vector and a class label,
//! measured through Gini mean differences.
//!
//! The coefficient compares the average within-class pairwise distance to
//! the average pooled pairwise distance; it is 0 when the numeric variable
//! is identically distributed across classes and 1 when each class is
//! concentrated at a point while classes differ.
//!
//! What the crate provides:
//!
//! - point estimation from labeled samples of any dimension
//!   ([`gini_correlation_point`], [`LabeledSample`]);
//! - confidence intervals by jackknife empirical likelihood (plain,
//!   adjusted, and spatial-depth-weighted variants) and by the
//!   jackknife-variance normal approximation ([`confidence_intervals`]);
//! - exact population values for three two-class mixture families and a
//!   seeded Monte Carlo approximation for arbitrary mixtures
//!   ([`rho_exponential`], [`rho_monte_carlo`]);
//! - a reproducible coverage-study harness over configurable mixture
//!   scenarios ([`coverage_study`]);
//! - the iris measurements as a bundled example dataset ([`iris`]).
//!
//! All estimation is deterministic; randomized components (sampling,
//! simulation) are deterministic given their seed.

pub mod datasets;
pub mod el_solver;
pub mod error;
pub mod gmd;
pub mod intervals;
pub mod jackknife;
mod numeric;
pub mod oracles;
pub mod simulation;
pub mod special;

pub use datasets::{iris, iris_features, IRIS_FEATURES, IRIS_SPECIES};
pub use el_solver::{
    ajel_stat, default_adjustment, jel_stat, solve_lambda, spatial_depth_weights, wjel_stat,
    ElEvaluation, ElStatus, LambdaSolution, WeightVector,
};
pub use error::{Error, Result};
pub use gmd::{
    gini_correlation_point, gini_correlation_point_u, gmd_u, w_n, GmdSummary, LabeledSample,
};
pub use intervals::{
    confidence_intervals, el_interval, jv_interval, ConfidenceInterval, IntervalStatus, Method,
};
pub use jackknife::{
    jackknife_variance, jackknife_variance_from_summary, pseudo_values, JackknifeVariance,
    PseudoValueSet,
};
pub use oracles::{
    rho_exponential, rho_monte_carlo, rho_normal_location, rho_normal_scale, MonteCarloEstimate,
    PopulationSpec,
};
pub use simulation::{
    coverage_study, sample_scenario, sample_scenario_with, scenario_from_toml_str, Allocation,
    Component, ComponentDist, CoverageReport, Scenario, StudyConfig, StudyDesign,
};
