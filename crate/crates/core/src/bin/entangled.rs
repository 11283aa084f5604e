//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on numerical failures, 2 on usage errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use entangled::analysis::toolbox::verify_toolbox;
use entangled::analysis::QuadratureSpec;
use entangled::harness::io::{
    read_samples, write_lowerbound_csv, write_samples_csv, write_sweep_csv, write_toolbox_csv,
    InstanceFile, LowerboundRow,
};
use entangled::harness::{run_error_sweep, SweepConfig};
use entangled::instances::{case1_params, case2_params, generate_subset_of_signals, NoiseConfig};
use entangled::lowerbound::run_sign_error_experiment;
use entangled::{default_initialization, Error, Execution, IterativeTruncation, SampleSet};

#[derive(Parser)]
#[command(
    name = "entangled",
    version,
    about = "Mean estimation for entangled single-sample Gaussians"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Master seed; overrides the seed of a sweep config when given.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run iterative truncation on samples from a CSV file or stdin and print JSON.
    Estimate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        mu0: Option<f64>,
        #[arg(long = "B")]
        b: Option<f64>,
        #[arg(long)]
        m: usize,
        /// Sample mean as mu0 and twice the sample diameter as B.
        #[arg(long, conflicts_with_all = ["mu0", "b"])]
        auto_init: bool,
        #[arg(long, default_value_t = 1.0)]
        inner_scale: f64,
        #[arg(long)]
        trace: bool,
        /// Run every averaging step even after the iterates become periodic.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Run a Monte Carlo error sweep described by a JSON config and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bayes sign-error experiment on the two-point prior.
    Lowerbound {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        case: u8,
        #[arg(long)]
        n: usize,
        /// Defaults to ceil(2 ln n) for case 1 and ceil(sqrt n) for case 2.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long = "c-sigma", default_value_t = 10.0)]
        c_sigma: f64,
        #[arg(long = "c-l", default_value_t = 0.1)]
        c_l: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every closed-form integral against quadrature on random parameters.
    VerifyToolbox {
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a subset-of-signals instance with constant noise.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu_star: f64,
        #[arg(long, default_value_t = 1e6)]
        noise_level: f64,
        /// Instance JSON destination.
        #[arg(long)]
        instance_out: Option<PathBuf>,
        /// Samples CSV destination (stdout when absent).
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn configure_threads(threads: usize) -> Result<(), Error> {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    configure_threads(cli.threads)?;
    let exec = Execution::Parallel;
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Estimate {
            input,
            mu0,
            b,
            m,
            auto_init,
            inner_scale,
            trace,
            exhaustive,
        } => {
            let values = match input {
                Some(p) => read_samples(BufReader::new(File::open(p)?))?,
                None => read_samples(io::stdin().lock())?,
            };
            let samples = SampleSet::external(values)?;
            let (mu0, b) = if auto_init {
                default_initialization(&samples)?
            } else {
                match (mu0, b) {
                    (Some(mu0), Some(b)) => (mu0, b),
                    _ => {
                        return Err(Error::Config(
                            "give both --mu0 and --B, or --auto-init".into(),
                        ))
                    }
                }
            };
            let r = IterativeTruncation::new(m)
                .inner_scale(inner_scale)
                .trace(trace)
                .exhaustive(exhaustive)
                .run(&samples, mu0, b)?;
            let mut doc = json!({
                "estimate": r.estimate,
                "mu0": mu0,
                "B": b,
                "m": m,
                "n": samples.len(),
                "schedule": r.schedule,
                "steps_executed": r.steps_executed,
            });
            if let Some(tr) = &r.trace {
                doc["trace"] = serde_json::to_value(tr)?;
            }
            let mut out = output(None)?;
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = SweepConfig::from_json(&text)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let report = run_error_sweep(&cfg, exec)?;
            let mut w = output(cfg.out.as_deref())?;
            write_sweep_csv(&report.rows, &mut w)?;
            w.flush()?;
            for (n, m, est, count) in &report.init_violations {
                eprintln!("note: n={n} m={m} {est}: {count} trials had B < 2|mu0 - mu*|");
            }
            for f in &report.failed {
                eprintln!(
                    "failed cell n={} m={} {}: {}",
                    f.n, f.m, f.estimator, f.error
                );
            }
            Ok(if report.failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Lowerbound {
            case,
            n,
            m,
            trials,
            c_sigma,
            c_l,
            out,
        } => {
            let nf = n as f64;
            let m = m.unwrap_or_else(|| match case {
                1 => (2.0 * nf.ln()).ceil() as usize,
                _ => nf.sqrt().ceil() as usize,
            });
            let params = match case {
                1 => case1_params(n, m, c_sigma, c_l)?,
                _ => case2_params(n, m, c_sigma, c_l)?,
            };
            if let Some(w) = &params.warning {
                eprintln!("warning: {w}");
            }
            let prior = params.prior;
            let rep = run_sign_error_experiment(&prior, n, trials, seed, exec)?;
            let row = LowerboundRow {
                n,
                m,
                case,
                c_sigma,
                c_l,
                wrong_rate: rep.wrong_sign_rate,
                bayes_error: rep.bayes_expected_error,
                l: prior.l,
                ci: rep.ci_halfwidth,
                seed,
            };
            let mut w = output(out.as_deref())?;
            write_lowerbound_csv(&[row], &mut w)?;
            w.flush()?;
            eprintln!(
                "case {case}: n={n} m={m} p={:.3e} sigma_q={:.4e} L={:.4e} alpha={:.4} well_conditioned={}",
                prior.p,
                prior.sigma_q,
                prior.l,
                prior.alpha,
                prior.well_conditioned()
            );
            eprintln!(
                "wrong-sign rate {:.4} ± {:.4} over {trials} trials; Bayes expected error {:.4e} ({:.3} L)",
                rep.wrong_sign_rate,
                rep.ci_halfwidth,
                rep.bayes_expected_error,
                rep.bayes_expected_error / prior.l
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyToolbox { draws, out } => {
            if draws == 0 {
                return Err(Error::Config("--draws must be at least 1".into()));
            }
            let rows = verify_toolbox(draws, seed, &QuadratureSpec::default())?;
            let mut w = output(out.as_deref())?;
            write_toolbox_csv(&rows, &mut w)?;
            w.flush()?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            eprintln!(
                "{} of {} closed forms match quadrature",
                rows.len() - failed,
                rows.len()
            );
            for kind in entangled::analysis::toolbox::KIND_NAMES {
                let broken = rows
                    .iter()
                    .filter(|r| r.kind == kind && r.bound_holds == Some(false))
                    .count();
                if broken > 0 {
                    eprintln!(
                        "warning: {kind}: stated bound exceeded on {broken} of {draws} draws"
                    );
                }
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Generate {
            n,
            m,
            mu_star,
            noise_level,
            instance_out,
            samples_out,
        } => {
            let noise = NoiseConfig::Constant { level: noise_level };
            let (inst, samples) = generate_subset_of_signals(n, m, mu_star, 1.0, &noise, seed)?;
            if let Some(p) = instance_out {
                let mut w = BufWriter::new(File::create(p)?);
                serde_json::to_writer_pretty(&mut w, &InstanceFile::new(&inst, seed))?;
                writeln!(w)?;
                w.flush()?;
            }
            let mut w = output(samples_out.as_deref())?;
            write_samples_csv(&samples.values, &mut w)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
