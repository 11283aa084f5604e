//! Log-log least squares for scaling exponents.

use serde::Serialize;

use super::sweep::SweepRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitVariable {
    N,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// OLS of `ln median_abs_err` on `ln n` (or `ln m`).
pub fn fit_scaling_exponent(rows: &[SweepRow], vary: FitVariable) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let x = match vary {
                FitVariable::N => r.n,
                FitVariable::M => r.m,
            };
            (x as f64, r.median_abs_err)
        })
        .collect();
    fit_log_log(&pts)
}

pub fn fit_log_log(pts: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some((x, y)) = pts
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::DegenerateFit(format!(
            "need positive finite points, got ({x}, {y})"
        )));
    }
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct x values, got {}",
            xs.len()
        )));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = logs.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ScalingFit {
        exponent: slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_log_log(&[(1.0, 1.0), (2.0, 1.0)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(fit_log_log(&[(1.0, 1.0), (2.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(fit_log_log(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn flat_line() {
        let f = fit_log_log(&[(1.0, 2.0), (2.0, 2.0), (4.0, 2.0)]).unwrap();
        assert_eq!(f.exponent, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }
}
