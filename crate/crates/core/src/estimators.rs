//! Iterative truncated averaging and the two plumbing baselines.
//!
//! One averaging step replaces `mu` by the mean of the samples clamped to
//! `[mu - delta, mu + delta]`. The step depends only on `mu`, so once an
//! iterate repeats bit-for-bit the rest of the stage is periodic and the
//! final iterate can be read off without running the remaining steps. Set
//! [`IterativeTruncation::exhaustive`] to run every step anyway.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    build_schedule, clamp_unchecked, IterationTrace, SampleSet, StageTrace, TruncationSchedule,
};

/// Environment variable overriding [`DEFAULT_STEP_BUDGET`].
pub const STEP_BUDGET_ENV: &str = "ENTANGLED_STEP_BUDGET";
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

/// Longest cycle looked for by the short-circuit.
const MAX_PERIOD: usize = 8;

/// Step budget from the environment, falling back to the default.
pub fn default_step_budget() -> Result<u64> {
    match std::env::var(STEP_BUDGET_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 1.0)
            .map(|v| v as u64)
            .ok_or_else(|| {
                Error::Config(format!(
                    "{STEP_BUDGET_ENV} must be a positive number, got {raw:?}"
                ))
            }),
        Err(_) => Ok(DEFAULT_STEP_BUDGET),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateResult {
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<IterationTrace>,
    pub schedule: TruncationSchedule,
    /// Averaging steps actually computed (at most `(T + 1) * (K + 1)`).
    pub steps_executed: u64,
}

/// Options for a run of iterative truncation.
#[derive(Debug, Clone, Copy)]
pub struct IterativeTruncation {
    pub m: usize,
    pub inner_scale: f64,
    pub trace: bool,
    pub exhaustive: bool,
    /// `None` reads [`STEP_BUDGET_ENV`].
    pub step_budget: Option<u64>,
}

impl IterativeTruncation {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            inner_scale: 1.0,
            trace: false,
            exhaustive: false,
            step_budget: None,
        }
    }

    pub fn inner_scale(mut self, scale: f64) -> Self {
        self.inner_scale = scale;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    pub fn exhaustive(mut self, on: bool) -> Self {
        self.exhaustive = on;
        self
    }

    pub fn step_budget(mut self, budget: u64) -> Self {
        self.step_budget = Some(budget);
        self
    }

    pub fn run(&self, samples: &SampleSet, mu0: f64, b: f64) -> Result<EstimateResult> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !mu0.is_finite() {
            return Err(Error::NonFinite("mu0"));
        }
        let n = samples.len();
        let schedule = build_schedule(b, n, self.m, self.inner_scale)?;
        let budget = match self.step_budget {
            Some(b) => b,
            None => default_step_budget()?,
        };
        let nominal = schedule.nominal_steps(n);
        if nominal > budget as u128 {
            return Err(Error::ScheduleOverflow {
                steps: nominal,
                budget,
            });
        }

        let values = &samples.values;
        let steps_per_stage = schedule.t + 1;
        let mut mu = mu0;
        let mut executed = 0u64;
        let mut trace = self.trace.then(IterationTrace::default);
        for stage in 0..=schedule.k {
            let delta = schedule.delta(stage);
            let run = run_stage(
                values,
                mu,
                delta,
                steps_per_stage,
                self.exhaustive,
                self.trace,
            );
            executed += run.executed;
            mu = run.last;
            if let Some(tr) = trace.as_mut() {
                tr.stages.push(StageTrace {
                    delta,
                    iterates: run.iterates,
                });
            }
        }
        Ok(EstimateResult {
            estimate: mu,
            trace,
            schedule,
            steps_executed: executed,
        })
    }
}

struct StageRun {
    last: f64,
    executed: u64,
    iterates: Vec<f64>,
}

/// Run `steps` averaging steps from `mu0`. `iterates` holds `mu_0..=mu_steps`
/// when `keep` is set.
fn run_stage(
    values: &[f64],
    mu0: f64,
    delta: f64,
    steps: u64,
    exhaustive: bool,
    keep: bool,
) -> StageRun {
    let mut iterates = Vec::new();
    if keep {
        iterates.reserve(steps as usize + 1);
        iterates.push(mu0);
    }
    // recent[i] holds mu_{t - i}.
    let mut recent = [f64::NAN; MAX_PERIOD + 1];
    recent[0] = mu0;
    let mut mu = mu0;
    for t in 0..steps {
        let next = mean_clamped(values, mu - delta, mu + delta);
        recent.copy_within(0..MAX_PERIOD, 1);
        recent[0] = next;
        mu = next;
        if keep {
            iterates.push(next);
        }
        if exhaustive {
            continue;
        }
        let done = t + 1;
        let period = (1..=MAX_PERIOD)
            .take_while(|&p| p as u64 <= done)
            .find(|&p| recent[p].to_bits() == next.to_bits());
        if let Some(p) = period {
            let remaining = steps - done;
            if keep {
                let base = iterates.len() - p;
                for j in 0..remaining as usize {
                    iterates.push(iterates[base + j % p]);
                }
            }
            // mu_{done + r} = mu_{done - p + (r mod p)}
            let r = (remaining % p as u64) as usize;
            let last = if r == 0 { next } else { recent[p - r] };
            return StageRun {
                last,
                executed: done,
                iterates,
            };
        }
    }
    StageRun {
        last: mu,
        executed: steps,
        iterates,
    }
}

/// Mean of `values` clamped to `[lo, hi]`, summed in four fixed lanes.
#[inline]
fn mean_clamped(values: &[f64], lo: f64, hi: f64) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut chunks = values.chunks_exact(4);
    for c in &mut chunks {
        acc[0] += clamp_unchecked(c[0], lo, hi);
        acc[1] += clamp_unchecked(c[1], lo, hi);
        acc[2] += clamp_unchecked(c[2], lo, hi);
        acc[3] += clamp_unchecked(c[3], lo, hi);
    }
    for (i, &x) in chunks.remainder().iter().enumerate() {
        acc[i] += clamp_unchecked(x, lo, hi);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) / values.len() as f64
}

/// One averaging step: the mean of the samples clamped to `[mu - delta, mu + delta]`.
pub fn iterate_once(samples: &SampleSet, mu: f64, delta: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !delta.is_finite() {
        return Err(Error::NonFinite("delta"));
    }
    if delta <= 0.0 {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !mu.is_finite() {
        return Err(Error::NonFinite("mu"));
    }
    Ok(mean_clamped(&samples.values, mu - delta, mu + delta))
}

/// Iterative truncation with default options (step budget from the environment).
pub fn estimate_iterative_truncation(
    samples: &SampleSet,
    mu0: f64,
    b: f64,
    m: usize,
    inner_scale: f64,
    trace_enabled: bool,
) -> Result<EstimateResult> {
    IterativeTruncation::new(m)
        .inner_scale(inner_scale)
        .trace(trace_enabled)
        .run(samples, mu0, b)
}

pub fn estimate_sample_mean(samples: &SampleSet) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(samples.values.iter().sum::<f64>() / samples.len() as f64)
}

/// Lower median: the sorted element at index `(n - 1) / 2`.
pub fn estimate_median(samples: &SampleSet) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = samples.values.clone();
    let mid = (v.len() - 1) / 2;
    let (_, x, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*x)
}
