//! Sweep configuration, read from JSON.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::NoiseConfig;

/// How `m` is chosen for each `n`. Real-valued rules are rounded up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MRule {
    Fixed {
        m: usize,
    },
    /// `ceil(c n)`
    Proportional {
        c: f64,
    },
    /// `ceil(c sqrt(n ln n))`
    Threshold {
        c: f64,
    },
}

impl MRule {
    pub fn m_for(&self, n: usize) -> Result<usize> {
        let nf = n as f64;
        let raw = match *self {
            MRule::Fixed { m } => return check_m(m, n),
            MRule::Proportional { c } => c * nf,
            MRule::Threshold { c } => c * (nf * nf.ln()).sqrt(),
        };
        if !(raw.is_finite() && raw > 0.0) {
            return Err(Error::Config(format!(
                "m rule {self:?} gives {raw} at n={n}"
            )));
        }
        check_m(raw.ceil() as usize, n)
    }
}

fn check_m(m: usize, n: usize) -> Result<usize> {
    if m < 1 || m > n {
        return Err(Error::Config(format!(
            "m rule gives m={m}, outside [1, {n}]"
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    IterTrunc,
    Median,
    Mean,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::IterTrunc => "iter_trunc",
            EstimatorKind::Median => "median",
            EstimatorKind::Mean => "mean",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "iter_trunc" => Ok(EstimatorKind::IterTrunc),
            "median" => Ok(EstimatorKind::Median),
            "mean" => Ok(EstimatorKind::Mean),
            other => Err(Error::Config(format!("unknown estimator {other:?}"))),
        }
    }

    /// Stable index mixed into trial seeds.
    pub fn index(&self) -> u64 {
        match self {
            EstimatorKind::IterTrunc => 0,
            EstimatorKind::Median => 1,
            EstimatorKind::Mean => 2,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_grid: Vec<usize>,
    pub m_rule: MRule,
    pub estimators: Vec<EstimatorKind>,
    pub noise: NoiseConfig,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub inner_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub mu_star: f64,
    #[serde(default = "one")]
    pub sigma_signal: f64,
    /// Overrides the environment step budget for iterative truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_budget: Option<u64>,
    /// Off by default so that result files are byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad sweep config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators selected".into()));
        }
        let mut est = self.estimators.clone();
        est.sort();
        est.dedup();
        if est.len() != self.estimators.len() {
            return Err(Error::Config("estimators must be distinct".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.inner_scale.is_finite() && self.inner_scale > 0.0) {
            return Err(Error::Config(format!(
                "inner_scale must be positive, got {}",
                self.inner_scale
            )));
        }
        if !self.mu_star.is_finite() {
            return Err(Error::Config("mu_star must be finite".into()));
        }
        if !(self.sigma_signal > 0.0 && self.sigma_signal <= 1.0) {
            return Err(Error::Config(format!(
                "sigma_signal must lie in (0, 1], got {}",
                self.sigma_signal
            )));
        }
        let mut needs_noise = false;
        for &n in &self.n_grid {
            if n < 2 {
                return Err(Error::Config(format!(
                    "every n must be at least 2, got {n}"
                )));
            }
            needs_noise |= self.m_rule.m_for(n)? < n;
        }
        if needs_noise {
            self.noise
                .validate()
                .map_err(|e| Error::Config(format!("noise: {e}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{"n_grid":[1024,4096], "m_rule":{"kind":"threshold","c":4.0},
        "estimators":["iter_trunc","median","mean"], "noise":{"kind":"constant","level":1e6},
        "trials":200, "seed":12345, "inner_scale":1.0, "out":"results.csv"}"#;

    #[test]
    fn parses_documented_schema() {
        let c = SweepConfig::from_json(EXAMPLE).unwrap();
        c.validate().unwrap();
        assert_eq!(c.m_rule.m_for(1024).unwrap(), 337);
        assert_eq!(c.estimators.len(), 3);
        assert_eq!(c.sigma_signal, 1.0);
        assert!(!c.record_wall_time);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = SweepConfig::from_json(EXAMPLE).unwrap();
        c.n_grid.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = SweepConfig::from_json(EXAMPLE).unwrap();
        c.m_rule = MRule::Fixed { m: 5000 };
        assert!(c.validate().is_err());
        assert!(SweepConfig::from_json(r#"{"n_grid":[4]}"#).is_err());
        assert_eq!(MRule::Proportional { c: 0.25 }.m_for(10).unwrap(), 3);
        assert!(EstimatorKind::from_name("mode").is_err());
    }
}
