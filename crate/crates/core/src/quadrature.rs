//! Globally adaptive Gauss–Kronrod (7/15) quadrature over finite segments.
//!
//! The integrator keeps every panel in a max-heap keyed by its error estimate
//! and bisects the worst panel until the summed estimate drops below the
//! absolute tolerance. Several disjoint segments (for example the pieces of a
//! density, split at known breakpoints) share one error budget.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_panels: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub panels: usize,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err;
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod evaluation with the embedded 7-point Gauss estimate.
pub fn gauss_kronrod_15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut gauss = f_center * WG[3];
    let mut kronrod = f_center * WGK[7];
    let mut res_abs = f_center.magnitude() * WGK[7];
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let value = kronrod * half;
    let err = rescale_error(
        ((kronrod - gauss) * half).magnitude(),
        res_abs * abs_half,
        res_asc * abs_half,
    );
    (value, err)
}

struct Panel<T> {
    segment: usize,
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

#[derive(PartialEq)]
struct HeapKey(f64, usize);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, cfg: &AdaptiveConfig) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_segments(|_, x| f(x), &[(a, b)], cfg)
}

/// Integrate `f` over `[a, b]` with the domain split at `breakpoints` first.
pub fn integrate_with_breakpoints<T, F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &AdaptiveConfig,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let segments = split_at(a, b, breakpoints);
    integrate_segments(|_, x| f(x), &segments, cfg)
}

/// Cut `[a, b]` at every breakpoint strictly inside it.
pub fn split_at(a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut left = a;
    for c in cuts {
        out.push((left, c));
        left = c;
    }
    out.push((left, b));
    out
}

/// Integrate over a list of finite segments sharing one error budget.
///
/// `f` receives the index of the segment a node belongs to, so callers can
/// attach a per-segment weight (a piecewise density, for instance).
pub fn integrate_segments<T, F>(
    f: F,
    segments: &[(f64, f64)],
    cfg: &AdaptiveConfig,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(usize, f64) -> T,
{
    if !(cfg.abs_tol > 0.0) {
        return Err(Error::Argument("abs_tol must be positive".into()));
    }
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(segments.len() * 4);
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;

    for (idx, &(a, b)) in segments.iter().enumerate() {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Argument(format!(
                "segment [{a}, {b}] is not finite"
            )));
        }
        if b <= a {
            continue;
        }
        let fs = |x: f64| f(idx, x);
        let (value, err) = gauss_kronrod_15(&fs, a, b);
        total_err += err;
        heap.push(HeapKey(err, panels.len()));
        panels.push(Panel {
            segment: idx,
            a,
            b,
            value,
            err,
        });
    }

    loop {
        if total_err <= cfg.abs_tol {
            // refresh the running total before declaring convergence
            total_err = panels.iter().map(|p| p.err).sum();
            if total_err <= cfg.abs_tol {
                break;
            }
        }
        if panels.len() >= cfg.max_panels {
            return Err(Error::ToleranceNotMet {
                estimate: total_err,
                tolerance: cfg.abs_tol,
                panels: panels.len(),
            });
        }
        let Some(HeapKey(_, idx)) = heap.pop() else {
            return Err(Error::ToleranceNotMet {
                estimate: total_err,
                tolerance: cfg.abs_tol,
                panels: panels.len(),
            });
        };
        let (seg, a, b, old_err) = {
            let p = &panels[idx];
            (p.segment, p.a, p.b, p.err)
        };
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // panel at machine resolution: keep it, never split again
            continue;
        }
        let fs = |x: f64| f(seg, x);
        let (v1, e1) = gauss_kronrod_15(&fs, a, mid);
        let (v2, e2) = gauss_kronrod_15(&fs, mid, b);
        total_err += e1 + e2 - old_err;
        panels[idx] = Panel {
            segment: seg,
            a,
            b: mid,
            value: v1,
            err: e1,
        };
        heap.push(HeapKey(e1, idx));
        heap.push(HeapKey(e2, panels.len()));
        panels.push(Panel {
            segment: seg,
            a: mid,
            b,
            value: v2,
            err: e2,
        });
    }

    panels.sort_by(|p, q| p.segment.cmp(&q.segment).then(p.a.total_cmp(&q.a)));
    let mut value = T::default();
    for p in &panels {
        value = value + p.value;
    }
    Ok(QuadResult {
        value,
        error_estimate: total_err,
        panels: panels.len(),
    })
}
