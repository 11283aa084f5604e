//! Scalar special functions used across the crate.
//!
//! `erf` and `erfc` come from `libm` (a port of the FreeBSD msun routines,
//! accurate to about one ulp). The normal tails are computed through `erfc`
//! so that neither side loses relative accuracy far out.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Density of `N(mean, sd^2)` at `x`.
pub fn gauss_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    norm_pdf(z) / sd
}

/// `ln` of the `N(mean, sd^2)` density at `x`.
pub fn gauss_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `ln(1 + e^u)` without overflow or cancellation.
pub fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `k!!` for `k >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(k: i64) -> f64 {
    let mut acc = 1.0;
    let mut j = k;
    while j > 1 {
        acc *= j as f64;
        j -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // mpmath at 30 digits
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 3e-16);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 3e-16);
        assert!((norm_sf(10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-14);
        assert!((norm_cdf(-10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-14);
        assert_eq!(norm_cdf(0.0), 0.5);
    }

    #[test]
    fn softplus_branches() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-16);
        assert_eq!(softplus(800.0), 800.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert!((softplus(-30.0) / (-30f64).exp() - 1.0).abs() < 1e-12);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(
            log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn double_factorials() {
        let got: Vec<f64> = (-1..=7).map(double_factorial).collect();
        assert_eq!(got, vec![1.0, 1.0, 1.0, 2.0, 3.0, 8.0, 15.0, 48.0, 105.0]);
    }

    #[test]
    fn ln_pdf_matches_pdf() {
        for &(x, m, s) in &[(0.3, -1.0, 2.0), (1.5, 0.0, 0.1), (-2.0, 1.0, 7.0)] {
            assert!((gauss_ln_pdf(x, m, s) - gauss_pdf(x, m, s).ln()).abs() < 1e-12);
        }
    }
}
