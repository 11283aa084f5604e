//! Mean estimation for entangled single-sample Gaussians.
//!
//! Every sample `x_i ~ N(mu*, sigma_i^2)` shares the mean but carries its own
//! unknown variance. In the subset-of-signals model only `m` of the `n`
//! standard deviations are guaranteed to be at most 1. This crate provides:
//!
//! - [`estimators`]: iterative truncated averaging with a halving window
//!   ladder, plus sample mean and median baselines.
//! - [`instances`]: seeded generators for subset-of-signals instances and for
//!   the two-point prior used by the lower-bound construction.
//! - [`lowerbound`]: log-domain likelihood ratios for the two-point prior,
//!   closed-form moments of the per-sample likelihood factors, and the Bayes
//!   sign-error experiment.
//! - [`analysis`]: truncated-Gaussian bias, harmonic-mean quantities, a
//!   toolbox of closed-form Gaussian integrals and the adaptive quadrature
//!   used to verify them.
//! - [`harness`]: reproducible Monte Carlo sweeps, scaling fits and file
//!   formats used by the `entangled` CLI.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod instances;
pub mod lowerbound;
pub mod model;
pub mod parallel;
pub mod rng;

pub use error::{Error, Result};
pub use estimators::{
    estimate_iterative_truncation, estimate_median, estimate_sample_mean, iterate_once,
    EstimateResult, IterativeTruncation,
};
pub use model::{
    build_schedule, default_initialization, truncate, GaussianInstance, IterationTrace, SampleSet,
    StageTrace, TruncationSchedule,
};
pub use parallel::Execution;
