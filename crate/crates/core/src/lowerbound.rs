//! Likelihood-ratio machinery for the two-point prior.
//!
//! For the mixture density `f_mu(x) = p N(x; mu, sigma_p^2) + q N(x; mu, sigma_q^2)`
//! the per-sample log ratio between `mu = +L` and `mu = -L` is
//!
//! ```text
//! ln f_+(x) - ln f_-(x) = ln(1 + N(x)) - ln(1 + D(x)) + beta x
//! ln N(x) = ln alpha - (x - L)^2 / (2 sigma_pq^2)
//! ln D(x) = ln alpha - (x + L)^2 / (2 sigma_pq^2)
//! ```
//!
//! Everything is evaluated from `ln N`, `ln D` so that tiny `alpha` and huge
//! `sigma_q` do not underflow.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::analysis::special::softplus;
use crate::error::{Error, Result};
use crate::instances::{sample_prior_instance, trial_seed, Group, TwoPointPrior};
use crate::model::SampleSet;
use crate::parallel::{map_indexed, Execution};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LikelihoodReport {
    pub log_ratio: f64,
    pub x_p_part: f64,
    pub x_q_part: f64,
    /// `(|S_p|, |S_q|)`
    pub per_group_counts: (usize, usize),
}

/// `(ln N(x), ln D(x))`.
pub fn log_factors(x: f64, prior: &TwoPointPrior) -> (f64, f64) {
    let la = prior.ln_alpha();
    let s2 = 2.0 * prior.sigma_pq * prior.sigma_pq;
    let l = prior.l;
    (la - (x - l) * (x - l) / s2, la - (x + l) * (x + l) / s2)
}

/// One sample's contribution `ln(1 + N) - ln(1 + D) + beta x`.
pub fn sample_log_ratio(x: f64, prior: &TwoPointPrior) -> f64 {
    let (ln_n, ln_d) = log_factors(x, prior);
    softplus(ln_n) - softplus(ln_d) + prior.beta * x
}

pub fn log_likelihood_ratio(
    samples: &SampleSet,
    assignments: &[Group],
    prior: &TwoPointPrior,
) -> Result<LikelihoodReport> {
    if assignments.len() != samples.len() {
        return Err(Error::domain(format!(
            "{} assignments for {} samples",
            assignments.len(),
            samples.len()
        )));
    }
    let (mut xp, mut xq) = (0.0, 0.0);
    let (mut np, mut nq) = (0usize, 0usize);
    for (&x, g) in samples.values.iter().zip(assignments) {
        let c = sample_log_ratio(x, prior);
        match g {
            Group::P => {
                xp += c;
                np += 1;
            }
            Group::Q => {
                xq += c;
                nq += 1;
            }
        }
    }
    let log_ratio = xp + xq;
    if !log_ratio.is_finite() {
        return Err(Error::NonFinite(
            "log-likelihood ratio (check sigma_pq and alpha)",
        ));
    }
    Ok(LikelihoodReport {
        log_ratio,
        x_p_part: xp,
        x_q_part: xq,
        per_group_counts: (np, nq),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupMoments {
    /// `E[N^j]`
    pub n: f64,
    /// `E[D^j]`
    pub d: f64,
    /// `E[N^j D^j]`
    pub nd: f64,
}

fn group_sigma(prior: &TwoPointPrior, group: Group) -> f64 {
    match group {
        Group::P => prior.sigma_p,
        Group::Q => prior.sigma_q,
    }
}

/// Exact `E[N^j]`, `E[D^j]`, `E[N^j D^j]` for `x ~ N(sign L, sigma_group^2)`.
pub fn exact_group_moments(
    prior: &TwoPointPrior,
    group: Group,
    j: u32,
    sign: i8,
) -> Result<GroupMoments> {
    if j == 0 {
        return Err(Error::domain("moment order j must be at least 1"));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::domain(format!("sign must be +1 or -1, got {sign}")));
    }
    let jf = j as f64;
    let s2 = group_sigma(prior, group).powi(2);
    let v = prior.sigma_pq * prior.sigma_pq;
    let l2 = prior.l * prior.l;
    let la = prior.ln_alpha();
    let ln_near = jf * la + 0.5 * v.ln() - 0.5 * (v + jf * s2).ln();
    let ln_far = ln_near - 2.0 * jf * l2 / (v + jf * s2);
    let ln_nd = 2.0 * jf * la + 0.5 * v.ln()
        - 0.5 * (v + 2.0 * jf * s2).ln()
        - 2.0 * jf * l2 * (v + jf * s2) / (v * v + 2.0 * jf * v * s2);
    let (ln_n, ln_d) = if sign == 1 {
        (ln_near, ln_far)
    } else {
        (ln_far, ln_near)
    };
    let out = GroupMoments {
        n: ln_n.exp(),
        d: ln_d.exp(),
        nd: ln_nd.exp(),
    };
    if !(out.n.is_finite() && out.d.is_finite() && out.nd.is_finite()) {
        return Err(Error::NonFinite("group moments"));
    }
    Ok(out)
}

/// Taylor surrogate `beta x + sum_{j=1}^{2t-1} (-1)^{j+1} (N^j - D^j) / j`.
pub fn taylor_y(x: f64, prior: &TwoPointPrior, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::domain("Taylor order t must be at least 1"));
    }
    let (ln_n, ln_d) = log_factors(x, prior);
    let (nv, dv) = (ln_n.exp(), ln_d.exp());
    let (mut pn, mut pd) = (1.0, 1.0);
    let mut v = 0.0;
    for j in 1..2 * t {
        pn *= nv;
        pd *= dv;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        v += sign * (pn - pd) / j as f64;
    }
    let y = prior.beta * x + v;
    if !y.is_finite() {
        return Err(Error::NonFinite("taylor_y"));
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignErrorReport {
    pub wrong_sign_rate: f64,
    pub bayes_expected_error: f64,
    pub ci_halfwidth: f64,
    pub trials: usize,
    /// Average realized `|S_p|` per trial.
    pub mean_count_p: f64,
}

/// Score the Bayes sign decision on `trials` independent prior draws.
/// Ties count as half wrong.
pub fn run_sign_error_experiment(
    prior: &TwoPointPrior,
    n: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SignErrorReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let outcomes = map_indexed(exec, trials, |t| -> Result<(u8, usize)> {
        let draw = sample_prior_instance(prior, n, trial_seed(seed, t as u64))?;
        let rep = log_likelihood_ratio(&draw.samples, &draw.assignments, prior)?;
        // wrong counted in half units
        let half_wrong = if rep.log_ratio == 0.0 {
            1
        } else if (rep.log_ratio > 0.0) != (draw.sign > 0) {
            2
        } else {
            0
        };
        Ok((half_wrong, rep.per_group_counts.0))
    });
    let mut halves = 0u64;
    let mut count_p = 0u64;
    for o in outcomes {
        let (h, c) = o?;
        halves += h as u64;
        count_p += c as u64;
    }
    let r = halves as f64 / (2.0 * trials as f64);
    Ok(SignErrorReport {
        wrong_sign_rate: r,
        bayes_expected_error: 2.0 * prior.l * r,
        ci_halfwidth: 2.0 * (r * (1.0 - r) / trials as f64).sqrt(),
        trials,
        mean_count_p: count_p as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub t: u32,
    pub group: Group,
    pub exact_moments: BTreeMap<u32, GroupMoments>,
    /// Sample mean of `Y`.
    pub empirical_y_mean: f64,
    /// Sample mean of `Y^2`.
    pub empirical_y_second: f64,
    /// Sample variance of `Y`.
    pub empirical_y_central_second: f64,
    /// Mean of `max(N^{2t}, D^{2t}) / (2t)`.
    pub mean_remainder: f64,
    pub predicted_y_mean_bound: f64,
    pub predicted_y_second_order: f64,
    pub mc_draws: usize,
}

const MC_CHUNK: usize = 1 << 16;

/// Exact factor moments for `j = 1..=2t` and Monte Carlo statistics of `Y`
/// over `x ~ N(L, sigma_group^2)`.
pub fn moment_diagnostics(
    prior: &TwoPointPrior,
    group: Group,
    t: u32,
    mc_draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<MomentReport> {
    if mc_draws < 10_000 {
        return Err(Error::domain(format!(
            "mc_draws must be at least 10^4, got {mc_draws}"
        )));
    }
    if t == 0 {
        return Err(Error::domain("Taylor order t must be at least 1"));
    }
    let exact_moments = (1..=2 * t)
        .map(|j| exact_group_moments(prior, group, j, 1).map(|m| (j, m)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    let sd = group_sigma(prior, group);
    let chunks = mc_draws.div_ceil(MC_CHUNK);
    let two_t = 2 * t as i32;
    let partial = map_indexed(exec, chunks, |c| -> Result<[f64; 3]> {
        let mut rng = rng_from_seed(derive_seed(seed, &[c as u64]));
        let len = MC_CHUNK.min(mc_draws - c * MC_CHUNK);
        let mut acc = [0.0; 3];
        for _ in 0..len {
            let z: f64 = rng.sample(StandardNormal);
            let x = prior.l + sd * z;
            let y = taylor_y(x, prior, t)?;
            let (ln_n, ln_d) = log_factors(x, prior);
            acc[0] += y;
            acc[1] += y * y;
            acc[2] += (two_t as f64 * ln_n.max(ln_d)).exp() / two_t as f64;
        }
        Ok(acc)
    });
    let mut sums = [0.0; 3];
    for p in partial {
        let p = p?;
        for k in 0..3 {
            sums[k] += p[k];
        }
    }
    let nf = mc_draws as f64;
    let mean = sums[0] / nf;
    let second = sums[1] / nf;
    let central = (second - mean * mean).max(0.0) * nf / (nf - 1.0);

    let (l2, sp2, sq2) = (
        prior.l * prior.l,
        prior.sigma_p.powi(2),
        prior.sigma_q.powi(2),
    );
    let near = (l2 / sp2).min(1.0);
    let (mean_bound, second_order) = match group {
        Group::Q => (
            l2 / sq2,
            (prior.p * prior.p / prior.sigma_p) / (prior.q * prior.q / prior.sigma_q) * near
                + l2 / sq2,
        ),
        Group::P => (
            l2 / sq2 + prior.alpha * near,
            l2 * sp2 / (sq2 * sq2)
                + l2 * l2 / (sq2 * sq2)
                + prior.alpha.powi(2) * near
                + prior.alpha * l2 / sq2,
        ),
    };
    Ok(MomentReport {
        t,
        group,
        exact_moments,
        empirical_y_mean: mean,
        empirical_y_second: second,
        empirical_y_central_second: central,
        mean_remainder: sums[2] / nf,
        predicted_y_mean_bound: mean_bound,
        predicted_y_second_order: second_order,
        mc_draws,
    })
}
