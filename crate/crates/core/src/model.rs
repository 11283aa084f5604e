//! Domain types shared by the estimators and generators, the truncation map
//! and the window-ladder schedule arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden truth of one problem instance: the common mean and the per-sample
/// standard deviations, in generation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianInstance {
    pub mu_star: f64,
    pub sigmas: Vec<f64>,
}

impl GaussianInstance {
    pub fn new(mu_star: f64, sigmas: Vec<f64>) -> Result<Self> {
        if !mu_star.is_finite() {
            return Err(Error::NonFinite("mu_star"));
        }
        if sigmas.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::domain(format!(
                "sigma must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { mu_star, sigmas })
    }

    pub fn n(&self) -> usize {
        self.sigmas.len()
    }

    /// The `k`-th smallest standard deviation (1-based), `None` when out of range.
    pub fn sigma_order(&self, k: usize) -> Option<f64> {
        if k == 0 || k > self.sigmas.len() {
            return None;
        }
        let mut sorted = self.sigmas.clone();
        sorted.sort_by(f64::total_cmp);
        Some(sorted[k - 1])
    }

    /// True iff the `m`-th smallest sigma is at most 1.
    pub fn satisfies_subset_of_signals(&self, m: usize) -> bool {
        self.sigma_order(m).is_some_and(|s| s <= 1.0)
    }
}

/// Observed samples together with the seed that produced them (0 when the
/// values came from outside).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        Ok(Self { values, seed })
    }

    /// Samples that did not come from a seeded generator.
    pub fn external(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Clamp `x` into `[lo, hi]`.
pub fn truncate(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(x.is_finite() && lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Ok(clamp_unchecked(x, lo, hi))
}

/// Hot-path clamp; callers guarantee `lo <= hi` and finite inputs.
#[inline(always)]
pub(crate) fn clamp_unchecked(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

/// Control parameters of iterative truncation.
///
/// Stage `k` (for `k = 0..=K`) uses the half-width `B / 2^k` and runs
/// `T + 1` averaging steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub b: f64,
    pub k: u32,
    pub t: u64,
    pub inner_scale: f64,
}

impl TruncationSchedule {
    /// Half-width used in stage `stage`.
    pub fn delta(&self, stage: u32) -> f64 {
        self.b * 0.5f64.powi(stage as i32)
    }

    /// All half-widths `B, B/2, ..., B/2^K`.
    pub fn ladder(&self) -> Vec<f64> {
        (0..=self.k).map(|s| self.delta(s)).collect()
    }

    pub fn stages(&self) -> u32 {
        self.k + 1
    }

    /// Nominal number of elementary truncations, `T * (K + 1) * n`.
    pub fn nominal_steps(&self, n: usize) -> u128 {
        self.t as u128 * self.stages() as u128 * n as u128
    }
}

/// Build the schedule with `K = floor(log2 B)` (clamped at 0) and
/// `T = ceil(inner_scale * 64 n ln n / m)`.
pub fn build_schedule(b: f64, n: usize, m: usize, inner_scale: f64) -> Result<TruncationSchedule> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::domain(format!(
            "B must be positive and finite, got {b}"
        )));
    }
    if n < 2 {
        return Err(Error::domain(format!("n must be at least 2, got {n}")));
    }
    if m < 1 || m > n {
        return Err(Error::domain(format!("m must lie in [1, n={n}], got {m}")));
    }
    if !(inner_scale.is_finite() && inner_scale > 0.0) {
        return Err(Error::domain(format!(
            "inner_scale must be positive and finite, got {inner_scale}"
        )));
    }
    let k = b.log2().floor().max(0.0) as u32;
    let nf = n as f64;
    let t = (inner_scale * 64.0 * nf * nf.ln() / m as f64)
        .ceil()
        .max(1.0) as u64;
    Ok(TruncationSchedule {
        b,
        k,
        t,
        inner_scale,
    })
}

/// Sample mean as the starting point and twice the sample diameter as `B`.
///
/// When every sample coincides the diameter is zero and `B` falls back to 1.
pub fn default_initialization(samples: &SampleSet) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let values = &samples.values;
    let mu0 = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let diameter = hi - lo;
    let b = if diameter > 0.0 { 2.0 * diameter } else { 1.0 };
    Ok((mu0, b))
}

/// Iterates of one stage, `mu_0 ..= mu_{T+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub delta: f64,
    pub iterates: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub stages: Vec<StageTrace>,
}

impl IterationTrace {
    /// Per-stage errors `|mu_t - mu*|`.
    pub fn errors(&self, mu_star: f64) -> Vec<Vec<f64>> {
        self.stages
            .iter()
            .map(|s| s.iterates.iter().map(|mu| (mu - mu_star).abs()).collect())
            .collect()
    }

    pub fn final_iterate(&self) -> Option<f64> {
        self.stages.last().and_then(|s| s.iterates.last().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(5.0, 0.0, 2.0).unwrap(), 2.0);
        assert_eq!(truncate(1.0, 0.0, 2.0).unwrap(), 1.0);
        assert_eq!(truncate(-3.0, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn truncate_rejects_bad_intervals() {
        assert!(matches!(
            truncate(0.0, 2.0, 1.0),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(truncate(f64::NAN, 0.0, 1.0).is_err());
        assert!(truncate(0.0, f64::NEG_INFINITY, 1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        let s = build_schedule(8.0, 100, 100, 1.0).unwrap();
        assert_eq!((s.k, s.t), (3, 295));
        assert_eq!(s.ladder(), vec![8.0, 4.0, 2.0, 1.0]);
        assert_eq!(build_schedule(1.0, 100, 100, 1.0).unwrap().k, 0);
        assert_eq!(build_schedule(0.3, 100, 100, 1.0).unwrap().k, 0);
        // 64 * 1000 * ln(1000) / 50 = 8841.9265... evaluated with mpmath at 50 digits.
        assert_eq!(build_schedule(8.0, 1000, 50, 1.0).unwrap().t, 8842);
    }

    #[test]
    fn schedule_domain_errors() {
        assert!(build_schedule(0.0, 10, 5, 1.0).is_err());
        assert!(build_schedule(-1.0, 10, 5, 1.0).is_err());
        assert!(build_schedule(1.0, 1, 1, 1.0).is_err());
        assert!(build_schedule(1.0, 10, 0, 1.0).is_err());
        assert!(build_schedule(1.0, 10, 11, 1.0).is_err());
        assert!(build_schedule(1.0, 10, 5, 0.0).is_err());
    }

    #[test]
    fn default_init_examples() {
        let init =
            |v: &[f64]| default_initialization(&SampleSet::external(v.to_vec()).unwrap()).unwrap();
        assert_eq!(init(&[3.0, 3.0, 3.0]), (3.0, 1.0));
        assert_eq!(init(&[0.0, 10.0]), (5.0, 20.0));
        assert_eq!(init(&[-1.0, 0.0, 4.0]), (1.0, 10.0));
        assert!(matches!(
            default_initialization(&SampleSet::external(vec![]).unwrap()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn subset_of_signals_check() {
        let inst = GaussianInstance::new(0.0, vec![5.0, 1.0, 0.5, 2.0]).unwrap();
        assert!(inst.satisfies_subset_of_signals(2));
        assert!(!inst.satisfies_subset_of_signals(3));
        assert!(!inst.satisfies_subset_of_signals(5));
        assert!(GaussianInstance::new(0.0, vec![1.0, 0.0]).is_err());
        assert!(GaussianInstance::new(0.0, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn truncate_is_idempotent(x in -1e6f64..1e6, lo in -1e3f64..1e3, w in 0f64..1e3) {
            let hi = lo + w;
            let once = truncate(x, lo, hi).unwrap();
            prop_assert_eq!(truncate(once, lo, hi).unwrap(), once);
        }

        #[test]
        fn truncate_is_monotone_and_lipschitz(x in -1e6f64..1e6, y in -1e6f64..1e6, lo in -1e3f64..1e3, w in 0f64..1e3) {
            let hi = lo + w;
            let (fx, fy) = (truncate(x, lo, hi).unwrap(), truncate(y, lo, hi).unwrap());
            if x <= y { prop_assert!(fx <= fy); }
            prop_assert!((fx - fy).abs() <= (x - y).abs());
        }

        #[test]
        fn window_clamp_is_lipschitz_in_center(x in -1e4f64..1e4, mu in -1e4f64..1e4, mu2 in -1e4f64..1e4, delta in 1e-3f64..1e3) {
            let a = truncate(x, mu - delta, mu + delta).unwrap();
            let b = truncate(x, mu2 - delta, mu2 + delta).unwrap();
            prop_assert!((a - b).abs() <= (mu - mu2).abs() * (1.0 + 1e-12) + 1e-9);
        }

        #[test]
        fn ladder_ends_in_unit_band(b in 1f64..1e12) {
            let s = build_schedule(b, 10, 5, 1.0).unwrap();
            let last = s.delta(s.k);
            prop_assert!((1.0..2.0).contains(&last), "B={} K={} last={}", b, s.k, last);
        }
    }
}
