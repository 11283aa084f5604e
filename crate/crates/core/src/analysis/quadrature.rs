//! Adaptive Gauss-Kronrod quadrature on finite intervals.
//!
//! Each segment is integrated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss rule gives the error estimate `|K15 - G7|`. The segment with
//! the largest estimate is bisected until the summed estimate meets the
//! tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the center.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Half-width of the integration window in units of each Gaussian scale.
    pub tail_cut: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cut: 12.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.tail_cut.is_nan() || self.tail_cut < 8.0 {
            return Err(Error::domain(format!(
                "tail_cut must be at least 8, got {}",
                self.tail_cut
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be positive"));
        }
        Ok(())
    }

    pub fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        finite &= pair.is_finite();
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    if !finite {
        return Err(Error::NonFinite("integrand"));
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrate `f` over `[lo, hi]`.
pub fn quadrature<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    integrate_breakpoints(f, &[lo, hi], spec)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the segments
/// between consecutive (sorted) breakpoints.
pub fn integrate_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    spec.validate()?;
    if points.len() < 2 {
        return Err(Error::domain("need at least two integration limits"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("integration limits"));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInterval {
            lo: points[0],
            hi: points[points.len() - 1],
        });
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&f, w[0], w[1])?);
        }
    }
    let totals = |heap: &BinaryHeap<Segment>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    let (mut value, mut error) = totals(&heap);
    let mut subdivisions = 0;
    loop {
        if error <= spec.tolerance(value) {
            // Re-sum to shed the drift of the running totals.
            let (v, e) = totals(&heap);
            if e <= spec.tolerance(v) {
                return Ok(Quadrature {
                    value: v,
                    error: e,
                    subdivisions,
                });
            }
            value = v;
            error = e;
        }
        if subdivisions >= spec.max_subdivisions {
            let (v, e) = totals(&heap);
            return Err(Error::Quadrature {
                subdivisions,
                error: e,
                tolerance: spec.tolerance(v),
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(Quadrature {
                value: 0.0,
                error: 0.0,
                subdivisions,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Segment can no longer be split in double precision.
            heap.push(worst);
            let (v, e) = totals(&heap);
            return Err(Error::Quadrature {
                subdivisions,
                error: e,
                tolerance: spec.tolerance(v),
            });
        }
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Breakpoints for an integrand concentrated around a few Gaussian bumps.
///
/// Each feature `(center, scale)` contributes `center + scale * k` for
/// `k` in `{0, ±1, ±3, ±6, ±tail_cut}`. The window is the hull of all
/// `center ± tail_cut * scale`; `kinks` inside the window are added as well.
pub fn gaussian_breakpoints(features: &[(f64, f64)], kinks: &[f64], tail_cut: f64) -> Vec<f64> {
    let lo = features
        .iter()
        .map(|(c, s)| c - tail_cut * s)
        .fold(f64::INFINITY, f64::min);
    let hi = features
        .iter()
        .map(|(c, s)| c + tail_cut * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let offsets = [-tail_cut, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, tail_cut];
    let mut pts: Vec<f64> = features
        .iter()
        .flat_map(|&(c, s)| offsets.iter().map(move |k| c + s * k))
        .chain(kinks.iter().copied())
        .filter(|x| *x >= lo && *x <= hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Integrate over the Gaussian window described by `features` and `kinks`.
pub fn integrate_gaussian<F: Fn(f64) -> f64>(
    f: F,
    features: &[(f64, f64)],
    kinks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    if features.is_empty()
        || features
            .iter()
            .any(|(c, s)| !(c.is_finite() && s.is_finite() && *s > 0.0))
    {
        return Err(Error::domain(
            "gaussian features need finite centers and positive scales",
        ));
    }
    let pts = gaussian_breakpoints(features, kinks, spec.tail_cut);
    integrate_breakpoints(f, &pts, spec)
}
