//! Expected bias of a single truncated sample.
//!
//! For `x ~ N(mu*, sigma^2)` and a window `[mu - delta, mu + delta]` whose
//! center is offset by `delta_e = mu - mu*`, the clamped sample has mean
//!
//! ```text
//! E z - mu* = (delta_e - delta) Phi(a) + sigma (g(a) - g(b)) + (delta_e + delta) (1 - Phi(b))
//! ```
//!
//! with `a = (delta_e - delta) / sigma`, `b = (delta_e + delta) / sigma`, and
//! `Phi`, `g` the standard normal CDF and density.

use serde::Serialize;

use super::special::{norm_cdf, norm_pdf, norm_sf};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasQuery {
    pub sigma: f64,
    pub delta: f64,
    pub delta_e: f64,
}

impl BiasQuery {
    pub fn new(sigma: f64, delta: f64, delta_e: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::domain(format!(
                "delta must be positive and finite, got {delta}"
            )));
        }
        if !(delta_e.is_finite() && delta_e >= 0.0) {
            return Err(Error::domain(format!(
                "delta_e must be non-negative and finite, got {delta_e}"
            )));
        }
        Ok(Self {
            sigma,
            delta,
            delta_e,
        })
    }
}

/// `E[clamp(x, mu - delta, mu + delta)] - mu*` for any sign of `offset = mu - mu*`.
pub fn truncated_mean_bias(sigma: f64, delta: f64, offset: f64) -> f64 {
    let lo = offset - delta;
    let hi = offset + delta;
    let a = lo / sigma;
    let b = hi / sigma;
    lo * norm_cdf(a) + sigma * (norm_pdf(a) - norm_pdf(b)) + hi * norm_sf(b)
}

pub fn truncated_mean_expectation(q: &BiasQuery) -> f64 {
    truncated_mean_bias(q.sigma, q.delta, q.delta_e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compare `|E z - mu*|` with
/// `delta_e (1 - (1/5) delta / max(delta_e, delta) * delta / max(sigma, delta))`.
pub fn bias_bound_check(q: &BiasQuery) -> BiasCheck {
    let lhs = truncated_mean_expectation(q).abs();
    let rhs = bias_bound(q);
    BiasCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    }
}

pub fn bias_bound(q: &BiasQuery) -> f64 {
    let shrink = 0.2 * (q.delta / q.delta_e.max(q.delta)) * (q.delta / q.sigma.max(q.delta));
    q.delta_e * (1.0 - shrink)
}

/// Log-spaced grid: `sigma` over `[0.1, 100]` and `delta` over `[0.1, 10]`
/// (10 points each), `delta_e` in `{0} ∪` 9 log-spaced values in
/// `[0.01 delta, 10 delta]`. 1000 queries in total.
pub fn bias_grid() -> Vec<BiasQuery> {
    let logspace = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        let (a, b) = (lo.log10(), hi.log10());
        (0..k)
            .map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64))
            .collect()
    };
    let mut out = Vec::with_capacity(1000);
    for &sigma in &logspace(0.1, 100.0, 10) {
        for &delta in &logspace(0.1, 10.0, 10) {
            out.push(BiasQuery {
                sigma,
                delta,
                delta_e: 0.0,
            });
            for f in logspace(0.01, 10.0, 9) {
                out.push(BiasQuery {
                    sigma,
                    delta,
                    delta_e: f * delta,
                });
            }
        }
    }
    out
}
