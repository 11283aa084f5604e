//! Monte Carlo error sweeps.
//!
//! Every (n, estimator) cell runs `trials` independent trials of
//! generate, estimate, score. Trial seeds depend only on
//! `(seed, n, m, estimator, trial)`, and rows are sorted before output, so
//! results do not depend on the number of worker threads.

use std::time::Instant;

use serde::Serialize;

use super::config::{EstimatorKind, SweepConfig};
use crate::error::Result;
use crate::estimators::{estimate_median, estimate_sample_mean, IterativeTruncation};
use crate::instances::generate_subset_of_signals;
use crate::model::default_initialization;
use crate::parallel::{map_indexed, Execution};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub estimator: String,
    pub trials: usize,
    pub mean_abs_err: f64,
    pub median_abs_err: f64,
    pub q90_abs_err: f64,
    pub theory_bound: f64,
    pub seed: u64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedCell {
    pub n: usize,
    pub m: usize,
    pub estimator: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub failed: Vec<FailedCell>,
    /// Cells where some trial had `B < 2 |mu0 - mu*|`, with the trial count.
    pub init_violations: Vec<(usize, usize, String, usize)>,
}

/// `sqrt(n ln n) / m`
pub fn theory_bound(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    (nf * nf.ln()).sqrt() / m as f64
}

pub fn cell_seed(seed: u64, n: usize, m: usize, est: EstimatorKind) -> u64 {
    derive_seed(seed, &[n as u64, m as u64, est.index()])
}

struct Cell {
    n: usize,
    m: usize,
    est: EstimatorKind,
    seed: u64,
}

struct Trial {
    abs_err: f64,
    init_violated: bool,
    elapsed_ms: f64,
}

fn run_trial(cfg: &SweepConfig, cell: &Cell, trial: usize) -> Result<Trial> {
    let start = Instant::now();
    let seed = derive_seed(cell.seed, &[trial as u64]);
    let (inst, samples) = generate_subset_of_signals(
        cell.n,
        cell.m,
        cfg.mu_star,
        cfg.sigma_signal,
        &cfg.noise,
        seed,
    )?;
    let (estimate, init_violated) = match cell.est {
        EstimatorKind::IterTrunc => {
            let (mu0, b) = default_initialization(&samples)?;
            let mut it = IterativeTruncation::new(cell.m).inner_scale(cfg.inner_scale);
            it.step_budget = cfg.step_budget;
            let r = it.run(&samples, mu0, b)?;
            (r.estimate, b < 2.0 * (mu0 - inst.mu_star).abs())
        }
        EstimatorKind::Median => (estimate_median(&samples)?, false),
        EstimatorKind::Mean => (estimate_sample_mean(&samples)?, false),
    };
    Ok(Trial {
        abs_err: (estimate - inst.mu_star).abs(),
        init_violated,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Lower median and `ceil(0.9 k)`-th order statistic of non-empty `errs`.
pub fn error_summary(errs: &mut [f64]) -> (f64, f64, f64) {
    errs.sort_by(f64::total_cmp);
    let k = errs.len();
    let mean = errs.iter().sum::<f64>() / k as f64;
    let median = errs[(k - 1) / 2];
    let q90 = errs[((0.9 * k as f64).ceil() as usize).clamp(1, k) - 1];
    (mean, median, q90)
}

pub fn run_error_sweep(cfg: &SweepConfig, exec: Execution) -> Result<SweepReport> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let m = cfg.m_rule.m_for(n)?;
        for &est in &cfg.estimators {
            cells.push(Cell {
                n,
                m,
                est,
                seed: cell_seed(cfg.seed, n, m, est),
            });
        }
    }
    let trials = cfg.trials;
    let results = map_indexed(exec, cells.len() * trials, |u| {
        run_trial(cfg, &cells[u / trials], u % trials)
    });

    let mut report = SweepReport::default();
    for (cell, chunk) in cells.iter().zip(results.chunks(trials)) {
        let name = cell.est.name().to_string();
        if let Some(err) = chunk.iter().find_map(|r| r.as_ref().err()) {
            report.failed.push(FailedCell {
                n: cell.n,
                m: cell.m,
                estimator: name,
                error: err.to_string(),
            });
            continue;
        }
        let ok: Vec<&Trial> = chunk.iter().filter_map(|r| r.as_ref().ok()).collect();
        let mut errs: Vec<f64> = ok.iter().map(|t| t.abs_err).collect();
        let (mean, median, q90) = error_summary(&mut errs);
        let violations = ok.iter().filter(|t| t.init_violated).count();
        if violations > 0 {
            report
                .init_violations
                .push((cell.n, cell.m, name.clone(), violations));
        }
        let wall = if cfg.record_wall_time {
            ok.iter().map(|t| t.elapsed_ms).sum()
        } else {
            0.0
        };
        report.rows.push(SweepRow {
            n: cell.n,
            m: cell.m,
            estimator: name,
            trials,
            mean_abs_err: mean,
            median_abs_err: median,
            q90_abs_err: q90,
            theory_bound: theory_bound(cell.n, cell.m),
            seed: cell.seed,
            wall_time_ms: wall,
        });
    }
    report
        .rows
        .sort_by(|a, b| (a.n, a.m, &a.estimator).cmp(&(b.n, b.m, &b.estimator)));
    report
        .failed
        .sort_by(|a, b| (a.n, a.m, &a.estimator).cmp(&(b.n, b.m, &b.estimator)));
    Ok(report)
}
