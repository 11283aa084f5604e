//! File formats.
//!
//! - Sweep results: CSV with header
//!   `n,m,estimator,trials,mean_abs_err,median_abs_err,q90_abs_err,theory_bound,seed,wall_time_ms`.
//!   Reals are written in scientific notation with 17 significant digits so
//!   that a read-back reproduces every bit.
//! - Lower-bound results: CSV with header `n,m,case,C_sigma,c_L,wrong_rate,bayes_error,L,ci,seed`.
//! - Toolbox verification: CSV with header
//!   `kind,params_hash,closed_form,quadrature,abs_diff,pass,bound,bound_holds`
//!   (the last two are empty for kinds without a bound).
//! - Instances: JSON `{"mu_star": .., "sigmas": [..], "seed": ..}`.
//! - Samples: one column of reals, optionally under a header line (`x`).

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::sweep::SweepRow;
use crate::analysis::toolbox::VerifyRow;
use crate::error::{Error, Result};
use crate::model::GaussianInstance;

pub const SWEEP_HEADER: [&str; 10] = [
    "n",
    "m",
    "estimator",
    "trials",
    "mean_abs_err",
    "median_abs_err",
    "q90_abs_err",
    "theory_bound",
    "seed",
    "wall_time_ms",
];

pub const LOWERBOUND_HEADER: [&str; 10] = [
    "n",
    "m",
    "case",
    "C_sigma",
    "c_L",
    "wrong_rate",
    "bayes_error",
    "L",
    "ci",
    "seed",
];

pub const TOOLBOX_HEADER: [&str; 8] = [
    "kind",
    "params_hash",
    "closed_form",
    "quadrature",
    "abs_diff",
    "pass",
    "bound",
    "bound_holds",
];

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {what} from {field:?}")))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            r.estimator.clone(),
            r.trials.to_string(),
            fmt_real(r.mean_abs_err),
            fmt_real(r.median_abs_err),
            fmt_real(r.q90_abs_err),
            fmt_real(r.theory_bound),
            r.seed.to_string(),
            fmt_real(r.wall_time_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != SWEEP_HEADER {
        return Err(Error::Config(format!("unexpected sweep header {header:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(SweepRow {
                n: parse(&rec[0], "n")?,
                m: parse(&rec[1], "m")?,
                estimator: rec[2].to_string(),
                trials: parse(&rec[3], "trials")?,
                mean_abs_err: parse(&rec[4], "mean_abs_err")?,
                median_abs_err: parse(&rec[5], "median_abs_err")?,
                q90_abs_err: parse(&rec[6], "q90_abs_err")?,
                theory_bound: parse(&rec[7], "theory_bound")?,
                seed: parse(&rec[8], "seed")?,
                wall_time_ms: parse(&rec[9], "wall_time_ms")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerboundRow {
    pub n: usize,
    pub m: usize,
    pub case: u8,
    pub c_sigma: f64,
    pub c_l: f64,
    pub wrong_rate: f64,
    pub bayes_error: f64,
    pub l: f64,
    pub ci: f64,
    pub seed: u64,
}

pub fn write_lowerbound_csv<W: Write>(rows: &[LowerboundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOWERBOUND_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            r.case.to_string(),
            fmt_real(r.c_sigma),
            fmt_real(r.c_l),
            fmt_real(r.wrong_rate),
            fmt_real(r.bayes_error),
            fmt_real(r.l),
            fmt_real(r.ci),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_toolbox_csv<W: Write>(rows: &[VerifyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TOOLBOX_HEADER)?;
    for r in rows {
        w.write_record([
            r.kind.to_string(),
            r.params_hash.clone(),
            fmt_real(r.closed_form),
            fmt_real(r.quadrature),
            fmt_real(r.abs_diff),
            r.pass.to_string(),
            r.bound.map(fmt_real).unwrap_or_default(),
            r.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub mu_star: f64,
    pub sigmas: Vec<f64>,
    pub seed: u64,
}

impl InstanceFile {
    pub fn new(instance: &GaussianInstance, seed: u64) -> Self {
        Self {
            mu_star: instance.mu_star,
            sigmas: instance.sigmas.clone(),
            seed,
        }
    }

    pub fn instance(&self) -> Result<GaussianInstance> {
        GaussianInstance::new(self.mu_star, self.sigmas.clone())
    }
}

pub fn write_samples_csv<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "x")?;
    for v in values {
        writeln!(out, "{}", fmt_real(*v))?;
    }
    out.flush()?;
    Ok(())
}

/// Read one real per line. A non-numeric first line is taken as a header;
/// blank lines are skipped.
pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let field = line.trim().trim_end_matches(',');
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(Error::NonFinite("samples")),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Config(format!(
                    "line {}: cannot parse {field:?} as a number",
                    i + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn samples_with_and_without_header() {
        assert_eq!(
            read_samples("x\n1\n2\n\n3\n".as_bytes()).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            read_samples("1.5\n-2e3\n".as_bytes()).unwrap(),
            vec![1.5, -2000.0]
        );
        assert!(read_samples("x\n1\nfoo\n".as_bytes()).is_err());
        assert!(read_samples("x\n".as_bytes()).is_err());
        assert!(read_samples("1\nNaN\n".as_bytes()).is_err());
    }

    #[test]
    fn instance_json() {
        let f = InstanceFile {
            mu_star: 0.5,
            sigmas: vec![1.0, 30.0],
            seed: 4,
        };
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"mu_star":0.5,"sigmas":[1.0,30.0],"seed":4}"#);
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    fn arb_row() -> impl Strategy<Value = SweepRow> {
        (
            2usize..100_000,
            1usize..1000,
            0usize..3,
            1usize..500,
            any::<f64>(),
            any::<f64>(),
            any::<u64>(),
        )
            .prop_filter("finite", |t| t.4.is_finite() && t.5.is_finite())
            .prop_map(|(n, m, e, trials, a, b, seed)| SweepRow {
                n,
                m,
                estimator: ["iter_trunc", "median", "mean"][e].to_string(),
                trials,
                mean_abs_err: a.abs(),
                median_abs_err: b.abs(),
                q90_abs_err: a.abs().max(b.abs()),
                theory_bound: ((n as f64) * (n as f64).ln()).sqrt() / m as f64,
                seed,
                wall_time_ms: 0.0,
            })
    }

    proptest! {
        #[test]
        fn sweep_csv_round_trip(rows in prop::collection::vec(arb_row(), 0..8)) {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf).unwrap();
            let back = read_sweep_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, rows);
        }
    }
}
