//! Seeded instance generators.
//!
//! Two families live here: subset-of-signals instances (m unit-scale
//! signals hidden among n - m noisy samples) and the two-point prior used by
//! the lower-bound experiment, where every sample independently draws a small
//! or a large standard deviation and the mean is `+L` or `-L`.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GaussianInstance, SampleSet};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// How the n - m noisy standard deviations are chosen. Every generated value
/// is strictly above 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseConfig {
    Constant {
        level: f64,
    },
    /// Log-spaced between `low` and `high` inclusive.
    GeometricLadder {
        low: f64,
        high: f64,
    },
    /// `scale * U^(-1/shape)` for uniform `U` in (0, 1].
    ParetoTail {
        scale: f64,
        shape: f64,
    },
    /// Cycled in order.
    CustomList {
        sigmas: Vec<f64>,
    },
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let above_one = |v: f64, what: &str| {
            if v.is_finite() && v > 1.0 {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "{what} must be finite and > 1, got {v}"
                )))
            }
        };
        match self {
            NoiseConfig::Constant { level } => above_one(*level, "noise level"),
            NoiseConfig::GeometricLadder { low, high } => {
                above_one(*low, "ladder low")?;
                above_one(*high, "ladder high")?;
                if low > high {
                    return Err(Error::domain(format!(
                        "ladder low {low} exceeds high {high}"
                    )));
                }
                Ok(())
            }
            NoiseConfig::ParetoTail { scale, shape } => {
                above_one(*scale, "pareto scale")?;
                if !(shape.is_finite() && *shape > 0.0) {
                    return Err(Error::domain(format!(
                        "pareto shape must be positive, got {shape}"
                    )));
                }
                Ok(())
            }
            NoiseConfig::CustomList { sigmas } => {
                if sigmas.is_empty() {
                    return Err(Error::domain("custom noise list is empty"));
                }
                sigmas
                    .iter()
                    .try_for_each(|s| above_one(*s, "custom sigma"))
            }
        }
    }

    fn draw(&self, count: usize, rng: &mut Rng) -> Vec<f64> {
        match self {
            NoiseConfig::Constant { level } => vec![*level; count],
            NoiseConfig::GeometricLadder { low, high } => {
                if count == 1 {
                    return vec![*low];
                }
                let (a, b) = (low.ln(), high.ln());
                (0..count)
                    .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                    .collect()
            }
            NoiseConfig::ParetoTail { scale, shape } => (0..count)
                .map(|_| {
                    // 1 - [0, 1) lies in (0, 1]
                    let u = 1.0 - rng.random::<f64>();
                    scale * u.powf(-1.0 / shape)
                })
                .collect(),
            NoiseConfig::CustomList { sigmas } => {
                sigmas.iter().copied().cycle().take(count).collect()
            }
        }
    }
}

/// `m` samples with standard deviation `sigma_signal`, the rest from `noise`,
/// positions shuffled, then `x_i = mu_star + sigma_i z_i`. One seeded stream
/// drives the noise draw, the shuffle and the samples, in that order.
pub fn generate_subset_of_signals(
    n: usize,
    m: usize,
    mu_star: f64,
    sigma_signal: f64,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<(GaussianInstance, SampleSet)> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if m < 1 || m > n {
        return Err(Error::domain(format!("m must lie in [1, n={n}], got {m}")));
    }
    if !(sigma_signal.is_finite() && sigma_signal > 0.0 && sigma_signal <= 1.0) {
        return Err(Error::domain(format!(
            "sigma_signal must lie in (0, 1], got {sigma_signal}"
        )));
    }
    if m < n {
        noise.validate()?;
    }
    let mut rng = rng_from_seed(seed);
    let mut sigmas = vec![sigma_signal; m];
    sigmas.extend(noise.draw(n - m, &mut rng));
    sigmas.shuffle(&mut rng);
    let instance = GaussianInstance::new(mu_star, sigmas)?;
    let samples = draw_samples(&instance, &mut rng, seed)?;
    Ok((instance, samples))
}

fn draw_samples(instance: &GaussianInstance, rng: &mut Rng, seed: u64) -> Result<SampleSet> {
    let values = instance
        .sigmas
        .iter()
        .map(|s| {
            let z: f64 = rng.sample(StandardNormal);
            instance.mu_star + s * z
        })
        .collect();
    SampleSet::new(values, seed)
}

/// Constants controlling the well-conditioned check and the case guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConstants {
    pub c_q: f64,
    pub c_sigma: f64,
    pub c_l: f64,
    pub c_alpha: f64,
    /// Upper constant of the case 1 range `m <= c_p n^(1/4)`.
    pub c_p_upper: f64,
    /// Lower constant of the case 2 range `m >= C_p n^(1/4)`.
    pub c_p_lower: f64,
}

impl Default for PriorConstants {
    fn default() -> Self {
        Self {
            c_q: 10.0,
            c_sigma: 10.0,
            c_l: 0.1,
            c_alpha: 0.5,
            c_p_upper: 1.0,
            c_p_lower: 1.0,
        }
    }
}

/// Two-point prior: `sigma_i = sigma_p` with probability `p`, otherwise
/// `sigma_q`; the mean is `+L` or `-L` with equal probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointPrior {
    pub p: f64,
    pub q: f64,
    pub sigma_p: f64,
    pub sigma_q: f64,
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma_pq: f64,
    pub constants: PriorConstants,
}

impl TwoPointPrior {
    pub fn new(p: f64, sigma_p: f64, sigma_q: f64, l: f64) -> Result<Self> {
        Self::with_constants(p, sigma_p, sigma_q, l, PriorConstants::default())
    }

    pub fn with_constants(
        p: f64,
        sigma_p: f64,
        sigma_q: f64,
        l: f64,
        constants: PriorConstants,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
        }
        for (v, what) in [(sigma_p, "sigma_p"), (sigma_q, "sigma_q")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "{what} must be positive and finite, got {v}"
                )));
            }
        }
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::domain(format!(
                "L must be non-negative and finite, got {l}"
            )));
        }
        if sigma_q <= sigma_p {
            return Err(Error::domain(format!(
                "sigma_q ({sigma_q}) must exceed sigma_p ({sigma_p})"
            )));
        }
        let q = 1.0 - p;
        let inv = 1.0 / (sigma_p * sigma_p) - 1.0 / (sigma_q * sigma_q);
        let sigma_pq = inv.sqrt().recip();
        Ok(Self {
            p,
            q,
            sigma_p,
            sigma_q,
            l,
            alpha: (p / sigma_p) / (q / sigma_q),
            beta: 2.0 * l / (sigma_q * sigma_q),
            gamma: sigma_p / sigma_q,
            sigma_pq,
            constants,
        })
    }

    /// `ln alpha`, finite whenever `0 < p < 1`.
    pub fn ln_alpha(&self) -> f64 {
        self.p.ln() - self.sigma_p.ln() - self.q.ln() + self.sigma_q.ln()
    }

    pub fn well_conditioned(&self) -> bool {
        let c = &self.constants;
        self.q > c.c_q * self.p
            && self.sigma_q > c.c_sigma * self.sigma_p
            && self.l < c.c_l * self.sigma_q
            && self.alpha < c.c_alpha
    }

    /// Same prior with every length multiplied by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        Self::with_constants(
            self.p,
            self.sigma_p * lambda,
            self.sigma_q * lambda,
            self.l * lambda,
            self.constants,
        )
    }
}

/// Prior together with a warning when `m` is outside the case's guarded range.
#[derive(Debug, Clone)]
pub struct CaseParams {
    pub prior: TwoPointPrior,
    pub warning: Option<String>,
}

fn case_inputs(n: usize, m: usize, c_sigma: f64, c_l: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("n must be at least 2, got {n}")));
    }
    if m < 1 || m >= n {
        return Err(Error::domain(format!(
            "m must lie in [1, n), got {m} with n={n}"
        )));
    }
    if !(c_sigma.is_finite() && c_sigma > 0.0 && c_l.is_finite() && c_l > 0.0) {
        return Err(Error::domain("C_sigma and c_L must be positive"));
    }
    Ok(m as f64 / n as f64)
}

/// Case 1: `sigma_p = 1`, `sigma_q = C_sigma / (p^2 n)`, `L = c_L / (p^2 n^1.5)`.
pub fn case1_params(n: usize, m: usize, c_sigma: f64, c_l: f64) -> Result<CaseParams> {
    let p = case_inputs(n, m, c_sigma, c_l)?;
    let nf = n as f64;
    let constants = PriorConstants {
        c_sigma,
        c_l,
        ..PriorConstants::default()
    };
    let sigma_q = c_sigma / (p * p * nf);
    let l = c_l / (p * p * nf.powf(1.5));
    let prior = TwoPointPrior::with_constants(p, 1.0, sigma_q, l, constants)?;
    let (lo, hi) = (2.0 * nf.ln(), constants.c_p_upper * nf.powf(0.25));
    let mf = m as f64;
    let warning = (mf < lo || mf > hi).then(|| {
        format!("case 1 expects 2 ln n <= m <= c_p n^(1/4), i.e. [{lo:.3}, {hi:.3}]; got m={m}")
    });
    Ok(CaseParams { prior, warning })
}

/// Case 2: `sigma_p = 1`, `sigma_q = C_sigma / p^(2/3)`, `L = c_L / (p^(2/3) sqrt n)`.
pub fn case2_params(n: usize, m: usize, c_sigma: f64, c_l: f64) -> Result<CaseParams> {
    let p = case_inputs(n, m, c_sigma, c_l)?;
    let nf = n as f64;
    let constants = PriorConstants {
        c_sigma,
        c_l,
        ..PriorConstants::default()
    };
    let p23 = p.powf(2.0 / 3.0);
    let prior =
        TwoPointPrior::with_constants(p, 1.0, c_sigma / p23, c_l / (p23 * nf.sqrt()), constants)?;
    let lo = constants.c_p_lower * nf.powf(0.25);
    let warning =
        ((m as f64) < lo).then(|| format!("case 2 expects m >= C_p n^(1/4) = {lo:.3}; got m={m}"));
    Ok(CaseParams { prior, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    P,
    Q,
}

#[derive(Debug, Clone)]
pub struct PriorDraw {
    /// `+1` or `-1`.
    pub sign: i8,
    pub instance: GaussianInstance,
    pub samples: SampleSet,
    pub assignments: Vec<Group>,
}

impl PriorDraw {
    pub fn count_p(&self) -> usize {
        self.assignments.iter().filter(|g| **g == Group::P).count()
    }
}

/// Draw the sign, then each group label, then the samples, from one stream.
pub fn sample_prior_instance(prior: &TwoPointPrior, n: usize, seed: u64) -> Result<PriorDraw> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = rng_from_seed(seed);
    let sign: i8 = if rng.random::<bool>() { 1 } else { -1 };
    let assignments: Vec<Group> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < prior.p {
                Group::P
            } else {
                Group::Q
            }
        })
        .collect();
    let sigmas = assignments
        .iter()
        .map(|g| match g {
            Group::P => prior.sigma_p,
            Group::Q => prior.sigma_q,
        })
        .collect();
    let instance = GaussianInstance::new(sign as f64 * prior.l, sigmas)?;
    let samples = draw_samples(&instance, &mut rng, seed)?;
    Ok(PriorDraw {
        sign,
        instance,
        samples,
        assignments,
    })
}

/// Seed for trial `trial` of an experiment with master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    derive_seed(seed, &[trial])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(v: &[f64]) -> Vec<f64> {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s
    }

    #[test]
    fn all_signal_and_constant_noise() {
        let noise = NoiseConfig::Constant { level: 100.0 };
        let (inst, s) = generate_subset_of_signals(3, 3, 5.0, 1.0, &noise, 9).unwrap();
        assert_eq!(inst.sigmas, vec![1.0; 3]);
        assert_eq!(s.len(), 3);
        let (inst, _) = generate_subset_of_signals(4, 2, 0.0, 1.0, &noise, 9).unwrap();
        assert_eq!(sorted(&inst.sigmas), vec![1.0, 1.0, 100.0, 100.0]);
    }

    #[test]
    fn generator_domain_errors() {
        let noise = NoiseConfig::Constant { level: 100.0 };
        assert!(generate_subset_of_signals(3, 4, 0.0, 1.0, &noise, 1).is_err());
        assert!(generate_subset_of_signals(3, 2, 0.0, 1.5, &noise, 1).is_err());
        let bad = NoiseConfig::Constant { level: 1.0 };
        assert!(generate_subset_of_signals(3, 2, 0.0, 1.0, &bad, 1).is_err());
    }

    #[test]
    fn single_signal_mean_is_close() {
        // 10^6 draws from one unit-variance entry; the 4 sigma band is 4e-3.
        let mut rng = rng_from_seed(11);
        let inst = GaussianInstance::new(3.0, vec![1.0]).unwrap();
        let mut sum = 0.0;
        for _ in 0..1_000_000 {
            sum += draw_samples(&inst, &mut rng, 0).unwrap().values[0];
        }
        assert!((sum / 1e6 - 3.0).abs() < 4e-3);
    }

    #[test]
    fn noise_kinds() {
        let mut rng = rng_from_seed(3);
        let ladder = NoiseConfig::GeometricLadder {
            low: 2.0,
            high: 200.0,
        }
        .draw(3, &mut rng);
        assert!((ladder[1] - 20.0).abs() < 1e-12);
        assert_eq!(
            NoiseConfig::CustomList {
                sigmas: vec![2.0, 3.0]
            }
            .draw(5, &mut rng),
            vec![2.0, 3.0, 2.0, 3.0, 2.0]
        );
        let pareto = NoiseConfig::ParetoTail {
            scale: 1.5,
            shape: 1.2,
        }
        .draw(1000, &mut rng);
        assert!(pareto.iter().all(|s| *s >= 1.5));
        assert!(NoiseConfig::ParetoTail {
            scale: 1.0,
            shape: 1.0
        }
        .validate()
        .is_err());
        assert!(NoiseConfig::GeometricLadder {
            low: 5.0,
            high: 2.0
        }
        .validate()
        .is_err());
        let json = r#"{"kind":"constant","level":1e6}"#;
        let parsed: NoiseConfig = serde_json::from_str(json).unwrap();
        assert_eq!(parsed, NoiseConfig::Constant { level: 1e6 });
    }

    #[test]
    fn case1_substitution() {
        let c = case1_params(10_000, 19, 10.0, 0.1).unwrap();
        let p = 19.0 / 1e4;
        let pr = c.prior;
        assert_eq!(pr.p, p);
        assert!((pr.sigma_q / (10.0 / (p * p * 1e4)) - 1.0).abs() < 1e-15);
        assert!((pr.l / (0.1 / (p * p * 1e6)) - 1.0).abs() < 1e-15);
        assert!((pr.l / pr.sigma_q - 0.01 / 100.0).abs() < 1e-15);
        // alpha = C_sigma / (m q) = 10 / (19 * 0.9981) = 0.52731...
        assert!((pr.alpha - 10.0 / (19.0 * (1.0 - p))).abs() < 1e-12);
        assert!(pr.alpha > 0.5);
        assert!(!pr.well_conditioned());
        assert!(c.warning.is_some(), "m=19 exceeds n^(1/4)=10");
    }

    #[test]
    fn case2_substitution() {
        let c = case2_params(10_000, 100, 10.0, 0.1).unwrap();
        let pr = c.prior;
        let p23 = 0.01f64.powf(2.0 / 3.0);
        assert!((pr.sigma_q / (10.0 / p23) - 1.0).abs() < 1e-15);
        assert!((pr.l / (0.1 / (p23 * 100.0)) - 1.0).abs() < 1e-15);
        // alpha = C_sigma p^(1/3) / q = 2.1764...
        assert!((pr.alpha - 10.0 * 0.01f64.powf(1.0 / 3.0) / 0.99).abs() < 1e-12);
        assert!(!pr.well_conditioned());
        assert!(c.warning.is_none());
    }

    #[test]
    fn prior_validation_and_derived() {
        assert!(TwoPointPrior::new(0.3, 2.0, 2.0, 0.1).is_err());
        assert!(TwoPointPrior::new(1.2, 1.0, 2.0, 0.1).is_err());
        let pr = TwoPointPrior::new(0.2, 1.0, 4.0, 0.5).unwrap();
        assert!((pr.alpha - (0.2 / 1.0) / (0.8 / 4.0)).abs() < 1e-15);
        assert!((pr.beta - 2.0 * 0.5 / 16.0).abs() < 1e-15);
        assert!((pr.gamma - 0.25).abs() < 1e-15);
        assert!((1.0 / pr.sigma_pq.powi(2) - (1.0 - 1.0 / 16.0)).abs() < 1e-12);
        assert!((pr.ln_alpha() - pr.alpha.ln()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_prior_draws() {
        let all_p = TwoPointPrior::new(1.0, 1.0, 3.0, 0.1).unwrap();
        let d = sample_prior_instance(&all_p, 50, 1).unwrap();
        assert!(d.instance.sigmas.iter().all(|s| *s == 1.0));
        let all_q = TwoPointPrior::new(0.0, 1.0, 3.0, 0.1).unwrap();
        let d = sample_prior_instance(&all_q, 50, 1).unwrap();
        assert!(d.instance.sigmas.iter().all(|s| *s == 3.0));
    }

    #[test]
    fn group_fraction_binomial_band() {
        let pr = TwoPointPrior::new(0.3, 1.0, 3.0, 0.1).unwrap();
        let d = sample_prior_instance(&pr, 100_000, 77).unwrap();
        let frac = d.count_p() as f64 / 1e5;
        assert!((frac - 0.3).abs() < 0.006, "frac={frac}");
        assert_eq!(d.instance.mu_star.abs(), 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn subset_of_signals_holds(n in 1usize..200, frac in 0.0f64..1.0, level in 1.001f64..1e6, seed in any::<u64>()) {
            let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
            let noise = NoiseConfig::Constant { level };
            let (inst, s) = generate_subset_of_signals(n, m, 0.0, 1.0, &noise, seed).unwrap();
            prop_assert!(inst.satisfies_subset_of_signals(m));
            if m < n {
                prop_assert!(inst.sigma_order(m + 1).unwrap() > 1.0);
            }
            let (inst2, s2) = generate_subset_of_signals(n, m, 0.0, 1.0, &noise, seed).unwrap();
            prop_assert_eq!(inst, inst2);
            prop_assert_eq!(s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            s2.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }

        #[test]
        fn case_identity(n in 100usize..100_000, frac in 0.001f64..0.5, c_sigma in 2.0f64..50.0, c_l in 0.01f64..0.5) {
            let m = ((n as f64 * frac) as usize).max(1);
            for c in [case1_params(n, m, c_sigma, c_l), case2_params(n, m, c_sigma, c_l)].into_iter().flatten() {
                let pr = c.prior;
                let rhs = (c_l / c_sigma) * pr.sigma_q / (n as f64).sqrt();
                prop_assert!((pr.l - rhs).abs() <= 1e-12 * rhs);
            }
        }

        #[test]
        fn case1_sigma_q_decreasing_in_m(n in 1000usize..100_000, m in 1usize..500) {
            let a = case1_params(n, m, 10.0, 0.1);
            let b = case1_params(n, m + 1, 10.0, 0.1);
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert!(b.prior.sigma_q < a.prior.sigma_q);
            }
        }
    }
}
