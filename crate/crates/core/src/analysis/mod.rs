//! Truncated-Gaussian bias, harmonic-mean quantities of a variance profile,
//! closed-form Gaussian integrals, and the quadrature used to check them.

pub mod bias;
pub mod quadrature;
pub mod special;
pub mod toolbox;

pub use bias::{
    bias_bound_check, truncated_mean_bias, truncated_mean_expectation, BiasCheck, BiasQuery,
};
pub use quadrature::{
    integrate_breakpoints, integrate_gaussian, quadrature, Quadrature, QuadratureSpec,
};
pub use toolbox::{
    defining_integral, toolbox_integral, verify_toolbox, ToolboxKind, ToolboxValue, VerifyRow,
};

use crate::error::{Error, Result};

fn check_sigmas(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::domain(format!(
            "sigma must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

/// Harmonic mean of `max(sigma_i, delta)`.
pub fn harmonic_mean_clamped(sigmas: &[f64], delta: f64) -> Result<f64> {
    check_sigmas(sigmas)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(format!(
            "delta must be positive and finite, got {delta}"
        )));
    }
    let inv: f64 = sigmas.iter().map(|s| 1.0 / s.max(delta)).sum();
    Ok(sigmas.len() as f64 / inv)
}

/// Number of `sigma_i <= delta`.
pub fn m_of_delta(sigmas: &[f64], delta: f64) -> Result<usize> {
    check_sigmas(sigmas)?;
    Ok(sigmas.iter().filter(|s| **s <= delta).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(harmonic_mean_clamped(&[1.0; 5], 1.0).unwrap(), 1.0);
        assert!((harmonic_mean_clamped(&[1.0, 3.0], 2.0).unwrap() - 2.4).abs() < 1e-15);
        assert_eq!(m_of_delta(&[0.5, 2.0], 1.0).unwrap(), 1);
        assert_eq!(m_of_delta(&[0.5, 2.0], 0.1).unwrap(), 0);
        assert_eq!(m_of_delta(&[1.0, 1.0, 1.0], 1.0).unwrap(), 3);
        assert!(m_of_delta(&[], 1.0).is_err());
        assert!(harmonic_mean_clamped(&[], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn harmonic_mean_bounded_by_count(sigmas in prop::collection::vec(1e-3f64..1e3, 1..50), delta in 1e-3f64..1e3) {
            let h = harmonic_mean_clamped(&sigmas, delta).unwrap();
            let m = m_of_delta(&sigmas, delta).unwrap();
            if m > 0 {
                let n = sigmas.len() as f64;
                prop_assert!(h <= n * delta / m as f64 * (1.0 + 1e-12));
            }
        }

        #[test]
        fn monotone_in_delta(sigmas in prop::collection::vec(1e-3f64..1e3, 1..50), d1 in 1e-3f64..1e3, d2 in 1e-3f64..1e3) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(harmonic_mean_clamped(&sigmas, lo).unwrap() <= harmonic_mean_clamped(&sigmas, hi).unwrap() * (1.0 + 1e-12));
            prop_assert!(m_of_delta(&sigmas, lo).unwrap() <= m_of_delta(&sigmas, hi).unwrap());
        }
    }
}
