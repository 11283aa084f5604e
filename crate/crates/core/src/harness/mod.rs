//! Reproducible sweeps, scaling fits and the file formats used by the CLI.

pub mod config;
pub mod fit;
pub mod io;
pub mod sweep;

pub use config::{EstimatorKind, MRule, SweepConfig};
pub use fit::{fit_log_log, fit_scaling_exponent, FitVariable, ScalingFit};
pub use sweep::{run_error_sweep, theory_bound, SweepReport, SweepRow};
