//! Closed-form Gaussian integrals and their quadrature cross-checks.
//!
//! Throughout, `N(x; m, c^2)` is the normal density and the Gaussian bumps
//! `exp(-(x - a)^2 / (2 b^2))` are unnormalized. Each [`ToolboxKind`] carries
//! its parameters; [`toolbox_integral`] evaluates the closed form and
//! [`defining_integral`] integrates the defining expression numerically.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng as _;
use serde::Serialize;

use super::quadrature::{integrate_breakpoints, integrate_gaussian, Quadrature, QuadratureSpec};
use super::special::{double_factorial, erf, erfc, gauss_pdf};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToolboxKind {
    /// `∫ exp(-(x-L)²/2b²) N(x; L, c²) dx`
    SameMeanProduct { b: f64, c: f64, l: f64 },
    /// `∫ exp(-(x+L)²/2b²) N(x; L, c²) dx`
    OppositeMeanProduct { b: f64, c: f64, l: f64 },
    /// `∫ exp(-(x-L)²/2a² - (x+L)²/2b²) N(x; L, c²) dx`
    DoubleExpProduct { a: f64, b: f64, c: f64, l: f64 },
    /// `∫ x exp(-(x∓L)²/2b²) N(x; L, c²) dx`, `+L` in the bump when `opposite`.
    XWeighted {
        b: f64,
        c: f64,
        l: f64,
        opposite: bool,
    },
    /// `∫_lo^hi x² exp(-x²/2b²) N(x; 0, c²) dx`
    X2WeightedAntiderivative { b: f64, c: f64, lo: f64, hi: f64 },
    /// `∫_lo^hi x² exp(-(x+M)²/2b²) N(x; 0, c²) dx`
    X2ShiftedAntiderivative {
        b: f64,
        c: f64,
        m: f64,
        lo: f64,
        hi: f64,
    },
    /// `erf(eps)` against `2 eps / sqrt(pi)`.
    ErfLinearBound { eps: f64 },
    /// `∫ |x|^p N(x; 0, c²) dx`
    AbsoluteMoment { c: f64, p: u32 },
    /// `∫ |exp(-(x-L)²/2b²) - exp(-(x+L)²/2b²)| N(x; L, c²) dx`.
    /// The bound `(4/sqrt(pi)) c²/(c²+b²) L/c` needs `c >= b`.
    AbsDifference { b: f64, c: f64, l: f64 },
    /// `∫ |x| (exp(-x²/2b²) - exp(-(x+M)²/2b²))² N(x; 0, c²) dx`
    XAbsDiffSq { b: f64, c: f64, m: f64 },
    /// `∫ x² |exp(-x²/2b²) - exp(-(x+M)²/2b²)| N(x; 0, c²) dx`
    X2AbsDiff { b: f64, c: f64, m: f64 },
}

pub const KIND_NAMES: [&str; 11] = [
    "same_mean_product",
    "opposite_mean_product",
    "double_exp_product",
    "x_weighted",
    "x2_weighted_antiderivative",
    "x2_shifted_antiderivative",
    "erf_linear_bound",
    "absolute_moment",
    "abs_difference",
    "x_abs_diff_sq",
    "x2_abs_diff",
];

/// Closed-form value, plus the stated upper bound for bound-type kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToolboxValue {
    pub exact: f64,
    pub bound: Option<f64>,
}

impl ToolboxValue {
    fn exact(exact: f64) -> Self {
        Self { exact, bound: None }
    }

    pub fn bound_holds(&self) -> Option<bool> {
        self.bound.map(|b| self.exact <= b)
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

fn non_negative(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} must be non-negative and finite, got {v}"
        )))
    }
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be finite, got {v}")))
    }
}

fn limits(lo: f64, hi: f64) -> Result<()> {
    finite(lo, "lo")?;
    finite(hi, "hi")?;
    if lo > hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Ok(())
}

/// `erf(x) - erf(y)`, switching to `erfc` on the far side to keep digits.
fn erf_diff(x: f64, y: f64) -> f64 {
    if x > 1.0 && y > 1.0 {
        erfc(y) - erfc(x)
    } else if x < -1.0 && y < -1.0 {
        erfc(-x) - erfc(-y)
    } else {
        erf(x) - erf(y)
    }
}

/// `E|Y|` for `Y ~ N(m, s²)`.
fn abs_normal_mean(m: f64, s: f64) -> f64 {
    s * (2.0 / PI).sqrt() * (-m * m / (2.0 * s * s)).exp() + m * erf(m / (SQRT_2 * s))
}

impl ToolboxKind {
    pub fn name(&self) -> &'static str {
        match self {
            ToolboxKind::SameMeanProduct { .. } => KIND_NAMES[0],
            ToolboxKind::OppositeMeanProduct { .. } => KIND_NAMES[1],
            ToolboxKind::DoubleExpProduct { .. } => KIND_NAMES[2],
            ToolboxKind::XWeighted { .. } => KIND_NAMES[3],
            ToolboxKind::X2WeightedAntiderivative { .. } => KIND_NAMES[4],
            ToolboxKind::X2ShiftedAntiderivative { .. } => KIND_NAMES[5],
            ToolboxKind::ErfLinearBound { .. } => KIND_NAMES[6],
            ToolboxKind::AbsoluteMoment { .. } => KIND_NAMES[7],
            ToolboxKind::AbsDifference { .. } => KIND_NAMES[8],
            ToolboxKind::XAbsDiffSq { .. } => KIND_NAMES[9],
            ToolboxKind::X2AbsDiff { .. } => KIND_NAMES[10],
        }
    }

    /// Parameters in declaration order (booleans as 0/1).
    pub fn params(&self) -> Vec<f64> {
        match *self {
            ToolboxKind::SameMeanProduct { b, c, l }
            | ToolboxKind::OppositeMeanProduct { b, c, l }
            | ToolboxKind::AbsDifference { b, c, l } => vec![b, c, l],
            ToolboxKind::DoubleExpProduct { a, b, c, l } => vec![a, b, c, l],
            ToolboxKind::XWeighted { b, c, l, opposite } => vec![b, c, l, opposite as u8 as f64],
            ToolboxKind::X2WeightedAntiderivative { b, c, lo, hi } => vec![b, c, lo, hi],
            ToolboxKind::X2ShiftedAntiderivative { b, c, m, lo, hi } => vec![b, c, m, lo, hi],
            ToolboxKind::ErfLinearBound { eps } => vec![eps],
            ToolboxKind::AbsoluteMoment { c, p } => vec![c, p as f64],
            ToolboxKind::XAbsDiffSq { b, c, m } | ToolboxKind::X2AbsDiff { b, c, m } => {
                vec![b, c, m]
            }
        }
    }

    /// FNV-1a over the kind name and the parameter bit patterns.
    pub fn params_hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        self.name().bytes().for_each(&mut eat);
        for p in self.params() {
            p.to_bits().to_le_bytes().into_iter().for_each(&mut eat);
        }
        format!("{h:016x}")
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ToolboxKind::SameMeanProduct { b, c, l }
            | ToolboxKind::OppositeMeanProduct { b, c, l }
            | ToolboxKind::XWeighted { b, c, l, .. } => {
                positive(b, "b")?;
                positive(c, "c")?;
                finite(l, "L")
            }
            ToolboxKind::DoubleExpProduct { a, b, c, l } => {
                positive(a, "a")?;
                positive(b, "b")?;
                positive(c, "c")?;
                finite(l, "L")
            }
            ToolboxKind::X2WeightedAntiderivative { b, c, lo, hi } => {
                positive(b, "b")?;
                positive(c, "c")?;
                limits(lo, hi)
            }
            ToolboxKind::X2ShiftedAntiderivative { b, c, m, lo, hi } => {
                positive(b, "b")?;
                positive(c, "c")?;
                finite(m, "M")?;
                limits(lo, hi)
            }
            ToolboxKind::ErfLinearBound { eps } => positive(eps, "eps"),
            ToolboxKind::AbsoluteMoment { c, .. } => positive(c, "c"),
            ToolboxKind::AbsDifference { b, c, l } => {
                positive(b, "b")?;
                positive(c, "c")?;
                non_negative(l, "L")
            }
            ToolboxKind::XAbsDiffSq { b, c, m } | ToolboxKind::X2AbsDiff { b, c, m } => {
                positive(b, "b")?;
                positive(c, "c")?;
                non_negative(m, "M")
            }
        }
    }

    /// Draw parameters for kind `name`. Scales are log-uniform on
    /// `[0.1, 10]`; the two bound kinds with a `c >= b` precondition sort
    /// their scales.
    pub fn sample(name: &str, rng: &mut Rng) -> Result<Self> {
        let mut lu = || 10f64.powf(rng.random_range(-1.0..1.0));
        let kind = match name {
            "same_mean_product" => ToolboxKind::SameMeanProduct {
                b: lu(),
                c: lu(),
                l: lu(),
            },
            "opposite_mean_product" => ToolboxKind::OppositeMeanProduct {
                b: lu(),
                c: lu(),
                l: lu(),
            },
            "double_exp_product" => ToolboxKind::DoubleExpProduct {
                a: lu(),
                b: lu(),
                c: lu(),
                l: lu(),
            },
            "x_weighted" => {
                let (b, c, l) = (lu(), lu(), lu());
                ToolboxKind::XWeighted {
                    b,
                    c,
                    l,
                    opposite: rng.random::<bool>(),
                }
            }
            "x2_weighted_antiderivative" => {
                let (b, c) = (lu(), lu());
                let (lo, hi) = sorted_pair(rng, 4.0);
                ToolboxKind::X2WeightedAntiderivative { b, c, lo, hi }
            }
            "x2_shifted_antiderivative" => {
                let (b, c, m) = (lu(), lu(), lu());
                let (lo, hi) = sorted_pair(rng, 4.0);
                ToolboxKind::X2ShiftedAntiderivative { b, c, m, lo, hi }
            }
            "erf_linear_bound" => ToolboxKind::ErfLinearBound {
                eps: 10f64.powf(rng.random_range(-6.0..1.0)),
            },
            "absolute_moment" => {
                let c = lu();
                ToolboxKind::AbsoluteMoment {
                    c,
                    p: rng.random_range(0..=6),
                }
            }
            "abs_difference" => {
                let (x, y, l) = (lu(), lu(), lu());
                ToolboxKind::AbsDifference {
                    b: x.min(y),
                    c: x.max(y),
                    l,
                }
            }
            "x_abs_diff_sq" => {
                let (x, y, m) = (lu(), lu(), lu());
                ToolboxKind::XAbsDiffSq {
                    b: x.min(y),
                    c: x.max(y),
                    m,
                }
            }
            "x2_abs_diff" => ToolboxKind::X2AbsDiff {
                b: lu(),
                c: lu(),
                m: lu(),
            },
            other => return Err(Error::Config(format!("unknown toolbox kind {other:?}"))),
        };
        Ok(kind)
    }
}

fn sorted_pair(rng: &mut Rng, half: f64) -> (f64, f64) {
    let x = rng.random_range(-half..half);
    let y = rng.random_range(-half..half);
    (x.min(y), x.max(y))
}

/// Closed form of `kind`.
pub fn toolbox_integral(kind: &ToolboxKind) -> Result<ToolboxValue> {
    kind.validate()?;
    let v = match *kind {
        ToolboxKind::SameMeanProduct { b, c, .. } => {
            ToolboxValue::exact(b / (b * b + c * c).sqrt())
        }
        ToolboxKind::OppositeMeanProduct { b, c, l } => {
            let s2 = b * b + c * c;
            ToolboxValue::exact(b / s2.sqrt() * (-2.0 * l * l / s2).exp())
        }
        ToolboxKind::DoubleExpProduct { a, b, c, l } => {
            let d = a * a * b * b + a * a * c * c + b * b * c * c;
            ToolboxValue::exact(a * b / d.sqrt() * (-2.0 * l * l * (a * a + c * c) / d).exp())
        }
        ToolboxKind::XWeighted { b, c, l, opposite } => {
            let s2 = b * b + c * c;
            let base = b / s2.sqrt();
            if opposite {
                ToolboxValue::exact(base * (-2.0 * l * l / s2).exp() * (b * b - c * c) / s2 * l)
            } else {
                ToolboxValue::exact(base * l)
            }
        }
        ToolboxKind::X2WeightedAntiderivative { b, c, lo, hi } => {
            let s2 = b * b + c * c;
            let k = s2.sqrt() / (SQRT_2 * b * c);
            let coef = b.powi(3) * c * c / (2.0 * s2.powf(1.5));
            let tail = |x: f64| {
                b * b * c * x / ((2.0 * PI).sqrt() * s2)
                    * (-x * x / (2.0 * b * b) - x * x / (2.0 * c * c)).exp()
            };
            ToolboxValue::exact(coef * erf_diff(k * hi, k * lo) - (tail(hi) - tail(lo)))
        }
        ToolboxKind::X2ShiftedAntiderivative { b, c, m, lo, hi } => {
            let s2 = b * b + c * c;
            let arg = |x: f64| (b * b * x + c * c * m + c * c * x) / (SQRT_2 * b * c * s2.sqrt());
            let coef = b * c * c * (b.powi(4) + b * b * c * c + c * c * m * m)
                / (2.0 * s2.powf(2.5))
                * (-m * m / (2.0 * s2)).exp();
            let tail = |x: f64| {
                b * b * c / ((2.0 * PI).sqrt() * s2 * s2)
                    * (-(m + x).powi(2) / (2.0 * b * b) - x * x / (2.0 * c * c)).exp()
                    * (b * b * x + c * c * (x - m))
            };
            ToolboxValue::exact(coef * erf_diff(arg(hi), arg(lo)) - (tail(hi) - tail(lo)))
        }
        ToolboxKind::ErfLinearBound { eps } => ToolboxValue {
            exact: erf(eps),
            bound: Some(2.0 * eps / PI.sqrt()),
        },
        ToolboxKind::AbsoluteMoment { c, p } => {
            let odd = if p % 2 == 1 { (2.0 / PI).sqrt() } else { 1.0 };
            ToolboxValue::exact(c.powi(p as i32) * double_factorial(p as i64 - 1) * odd)
        }
        ToolboxKind::AbsDifference { b, c, l } => {
            let s2 = b * b + c * c;
            let first = b / s2.sqrt() * erf((s2 / (2.0 * b * b * c * c)).sqrt() * l);
            let second = b * (-2.0 * l * l / s2).exp() / s2.sqrt()
                * erf((c * c - b * b) / (b * c * (2.0 * s2).sqrt()) * l);
            ToolboxValue {
                exact: first + second,
                bound: Some(4.0 / PI.sqrt() * c * c / s2 * l / c),
            }
        }
        ToolboxKind::XAbsDiffSq { b, c, m } => {
            // Expanding the square leaves three Gaussian products of the form
            // exp(-(x - mu0)^2 / 2v) N(x; 0, c^2) with v = b^2/2, each weighted by |x|.
            let v = b * b / 2.0;
            let vc = v + c * c;
            let term = |mu0: f64| {
                let f = (v / vc).sqrt() * (-mu0 * mu0 / (2.0 * vc)).exp();
                f * abs_normal_mean(mu0 * c * c / vc, (v * c * c / vc).sqrt())
            };
            let exact =
                term(0.0) - 2.0 * (-m * m / (4.0 * b * b)).exp() * term(-m / 2.0) + term(-m);
            ToolboxValue {
                exact,
                bound: Some((32.0 / PI).sqrt() * c.powi(3) * m / (b * b + 2.0 * c * c).powi(2)),
            }
        }
        ToolboxKind::X2AbsDiff { b, c, m } => {
            let s2 = b * b + c * c;
            let t1 = b.powi(3) * c * c / s2.powf(1.5) * erf(s2.sqrt() / (8f64.sqrt() * b * c) * m);
            let t2 = b * c * c * (b.powi(4) + b * b * c * c + c * c * m * m) / s2.powf(2.5)
                * erf((c * c - b * b) * m / (2.0 * b * c * (2.0 * s2).sqrt()))
                * (-m * m / (2.0 * s2)).exp();
            let t3 = 2.0 / (2.0 * PI).sqrt() * b * b * c.powi(3) * m / (s2 * s2)
                * (-m * m / (8.0 * b * b) - m * m / (8.0 * c * c)).exp();
            ToolboxValue::exact(t1 + t2 + t3)
        }
    };
    Ok(v)
}

fn bump(x: f64, center: f64, b: f64) -> f64 {
    let z = (x - center) / b;
    (-0.5 * z * z).exp()
}

/// Center and scale of the product of Gaussian bumps given as `(center, sd)`.
fn product_feature(parts: &[(f64, f64)]) -> (f64, f64) {
    let prec: f64 = parts.iter().map(|(_, s)| 1.0 / (s * s)).sum();
    let mean = parts.iter().map(|(c, s)| c / (s * s)).sum::<f64>() / prec;
    (mean, prec.sqrt().recip())
}

/// Numerical value of the defining integral of `kind`.
pub fn defining_integral(kind: &ToolboxKind, spec: &QuadratureSpec) -> Result<Quadrature> {
    kind.validate()?;
    match *kind {
        ToolboxKind::SameMeanProduct { b, c, l } => integrate_gaussian(
            |x| bump(x, l, b) * gauss_pdf(x, l, c),
            &[(l, c), (l, b), product_feature(&[(l, b), (l, c)])],
            &[],
            spec,
        ),
        ToolboxKind::OppositeMeanProduct { b, c, l } => integrate_gaussian(
            |x| bump(x, -l, b) * gauss_pdf(x, l, c),
            &[(l, c), (-l, b), product_feature(&[(-l, b), (l, c)])],
            &[],
            spec,
        ),
        ToolboxKind::DoubleExpProduct { a, b, c, l } => integrate_gaussian(
            |x| bump(x, l, a) * bump(x, -l, b) * gauss_pdf(x, l, c),
            &[
                (l, a),
                (-l, b),
                (l, c),
                product_feature(&[(l, a), (-l, b), (l, c)]),
            ],
            &[],
            spec,
        ),
        ToolboxKind::XWeighted { b, c, l, opposite } => {
            let center = if opposite { -l } else { l };
            integrate_gaussian(
                |x| x * bump(x, center, b) * gauss_pdf(x, l, c),
                &[(l, c), (center, b), product_feature(&[(center, b), (l, c)])],
                &[0.0],
                spec,
            )
        }
        ToolboxKind::X2WeightedAntiderivative { b, c, lo, hi } => integrate_breakpoints(
            |x| x * x * bump(x, 0.0, b) * gauss_pdf(x, 0.0, c),
            &interior(lo, hi, &[0.0]),
            spec,
        ),
        ToolboxKind::X2ShiftedAntiderivative { b, c, m, lo, hi } => integrate_breakpoints(
            |x| x * x * bump(x, -m, b) * gauss_pdf(x, 0.0, c),
            &interior(lo, hi, &[0.0, -m, product_feature(&[(-m, b), (0.0, c)]).0]),
            spec,
        ),
        ToolboxKind::ErfLinearBound { eps } => {
            let q = integrate_breakpoints(|t| (-t * t).exp(), &[0.0, eps], spec)?;
            let k = 2.0 / PI.sqrt();
            Ok(Quadrature {
                value: k * q.value,
                error: k * q.error,
                subdivisions: q.subdivisions,
            })
        }
        ToolboxKind::AbsoluteMoment { c, p } => integrate_gaussian(
            |x| x.abs().powi(p as i32) * gauss_pdf(x, 0.0, c),
            &[(0.0, c)],
            &[0.0],
            spec,
        ),
        ToolboxKind::AbsDifference { b, c, l } => integrate_gaussian(
            |x| (bump(x, l, b) - bump(x, -l, b)).abs() * gauss_pdf(x, l, c),
            &[(l, c), (l, b), (-l, b), product_feature(&[(l, b), (l, c)])],
            &[0.0],
            spec,
        ),
        ToolboxKind::XAbsDiffSq { b, c, m } => integrate_gaussian(
            |x| x.abs() * (bump(x, 0.0, b) - bump(x, -m, b)).powi(2) * gauss_pdf(x, 0.0, c),
            &[(0.0, c), (0.0, b), (-m, b)],
            &[0.0, -m / 2.0],
            spec,
        ),
        ToolboxKind::X2AbsDiff { b, c, m } => integrate_gaussian(
            |x| x * x * (bump(x, 0.0, b) - bump(x, -m, b)).abs() * gauss_pdf(x, 0.0, c),
            &[(0.0, c), (0.0, b), (-m, b)],
            &[0.0, -m / 2.0],
            spec,
        ),
    }
}

fn interior(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|x| *x > lo && *x < hi));
    pts.sort_by(f64::total_cmp);
    pts
}

/// Tolerance policy of the verification suite.
pub fn agrees(closed_form: f64, quadrature: f64) -> bool {
    (closed_form - quadrature).abs() <= (1e-8 * quadrature.abs()).max(1e-12)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub kind: &'static str,
    pub params_hash: String,
    pub closed_form: f64,
    pub quadrature: f64,
    pub abs_diff: f64,
    pub pass: bool,
    pub bound: Option<f64>,
    pub bound_holds: Option<bool>,
}

/// Evaluate every kind on `draws` random parameter sets.
///
/// `pass` compares closed form and quadrature; bound violations are reported
/// separately in `bound_holds`.
pub fn verify_toolbox(draws: usize, seed: u64, spec: &QuadratureSpec) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::with_capacity(draws * KIND_NAMES.len());
    for (k, name) in KIND_NAMES.iter().enumerate() {
        for d in 0..draws {
            let mut rng = rng_from_seed(derive_seed(seed, &[k as u64, d as u64]));
            let kind = ToolboxKind::sample(name, &mut rng)?;
            rows.push(verify_one(&kind, spec)?);
        }
    }
    Ok(rows)
}

pub fn verify_one(kind: &ToolboxKind, spec: &QuadratureSpec) -> Result<VerifyRow> {
    let cf = toolbox_integral(kind)?;
    let q = defining_integral(kind, spec)?;
    Ok(VerifyRow {
        kind: kind.name(),
        params_hash: kind.params_hash(),
        closed_form: cf.exact,
        quadrature: q.value,
        abs_diff: (cf.exact - q.value).abs(),
        pass: agrees(cf.exact, q.value),
        bound: cf.bound,
        bound_holds: cf.bound_holds(),
    })
}
