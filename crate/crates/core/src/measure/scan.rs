//! Interval scans for uniform α-Hölder (UαH) constants.
//!
//! A scan is a finite family of open intervals grouped into width rungs. The
//! estimate `sup η(I)/|I|^α` over the family is a lower bound on the true
//! constant; refining the family can only increase it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Measure;
use crate::error::{argument, Result};

/// Growth factor of the running maximum across the last two width rungs
/// above which the estimate is reported as divergent.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScanPart {
    /// Intervals `(c - w/2, c + w/2)` for every center and width.
    Centered { centers: Vec<f64>, widths: Vec<f64> },
    /// Every interval whose endpoints are lattice points `start + i·step`,
    /// `0 ≤ i ≤ cells`, spanning at most `max_cells` cells.
    Lattice {
        start: f64,
        step: f64,
        cells: usize,
        max_cells: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalScan {
    pub parts: Vec<ScanPart>,
    /// Intervals narrower than this are skipped.
    pub min_width: f64,
}

impl IntervalScan {
    pub fn new(min_width: f64) -> Self {
        Self {
            parts: Vec::new(),
            min_width,
        }
    }

    pub fn centered(mut self, centers: Vec<f64>, widths: Vec<f64>) -> Self {
        self.parts.push(ScanPart::Centered { centers, widths });
        self
    }

    pub fn lattice(mut self, start: f64, step: f64, cells: usize, max_cells: usize) -> Self {
        self.parts.push(ScanPart::Lattice {
            start,
            step,
            cells,
            max_cells,
        });
        self
    }

    /// All intervals of `[0, 1]` with endpoints on the `3^-level` grid.
    pub fn triadic(level: u32, min_width: f64) -> Self {
        let cells = 3usize.pow(level);
        Self::new(min_width).lattice(0.0, 1.0 / cells as f64, cells, cells)
    }

    /// Geometric width ladder `w_max·ratio^k`, stopped at `min_width`.
    pub fn geometric_widths(w_max: f64, ratio: f64, min_width: f64) -> Vec<f64> {
        let mut widths = Vec::new();
        let mut w = w_max;
        while w >= min_width * (1.0 - 1e-12) && widths.len() < 4096 {
            widths.push(w);
            w *= ratio;
        }
        widths
    }

    pub fn merge(mut self, other: IntervalScan) -> Self {
        self.parts.extend(other.parts);
        self.min_width = self.min_width.min(other.min_width);
        self
    }

    /// Width rungs in descending width order; rungs of different parts are
    /// not merged.
    pub fn rungs(&self) -> Vec<Rung<'_>> {
        let mut rungs: Vec<Rung<'_>> = Vec::new();
        for part in &self.parts {
            match part {
                ScanPart::Centered { centers, widths } => {
                    for &w in widths.iter().filter(|&&w| w >= self.min_width && w > 0.0) {
                        rungs.push(Rung {
                            width: w,
                            source: RungSource::Centered { centers },
                        });
                    }
                }
                ScanPart::Lattice {
                    start,
                    step,
                    cells,
                    max_cells,
                } => {
                    for k in 1..=(*max_cells).min(*cells) {
                        let w = k as f64 * step;
                        if w >= self.min_width {
                            rungs.push(Rung {
                                width: w,
                                source: RungSource::Lattice {
                                    start: *start,
                                    step: *step,
                                    cells: *cells,
                                    span: k,
                                },
                            });
                        }
                    }
                }
            }
        }
        rungs.sort_by(|a, b| b.width.total_cmp(&a.width));
        rungs
    }
}

/// One width rung of a scan; enumerates its intervals lazily.
#[derive(Debug, Clone, Copy)]
pub struct Rung<'a> {
    pub width: f64,
    source: RungSource<'a>,
}

#[derive(Debug, Clone, Copy)]
enum RungSource<'a> {
    Centered { centers: &'a [f64] },
    Lattice { start: f64, step: f64, cells: usize, span: usize },
}

impl Rung<'_> {
    pub fn for_each(&self, mut f: impl FnMut(f64, f64)) {
        match self.source {
            RungSource::Centered { centers } => {
                for &c in centers {
                    f(c - 0.5 * self.width, c + 0.5 * self.width);
                }
            }
            RungSource::Lattice {
                start,
                step,
                cells,
                span,
            } => {
                for i in 0..=(cells - span) {
                    f(start + i as f64 * step, start + (i + span) as f64 * step);
                }
            }
        }
    }

    fn best_ratio(&self, eta: &Measure, alpha: f64) -> (f64, (f64, f64)) {
        let mut best = (f64::NEG_INFINITY, (f64::NAN, f64::NAN));
        self.for_each(|a, b| {
            let ratio = eta.mass_in(a, b) / (b - a).powf(alpha);
            if ratio > best.0 {
                best = (ratio, (a, b));
            }
        });
        best
    }
}

/// Result of a UαH scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UahEstimate {
    /// `max η(I)/|I|^α` over the scanned intervals.
    pub constant: f64,
    /// An interval attaining the maximum.
    pub witness: (f64, f64),
    /// Running maximum grew more than [`DIVERGENCE_FACTOR`] over the last two rungs.
    pub divergent: bool,
    pub rung_widths: Vec<f64>,
    pub running_max: Vec<f64>,
}

/// Scan-based lower bound for the UαH constant of `eta`.
pub fn uah_constant(eta: &Measure, alpha: f64, scan: &IntervalScan) -> Result<UahEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return argument(format!("alpha must lie in (0,1], got {alpha}"));
    }
    let rungs = scan.rungs();
    if rungs.is_empty() {
        return argument("interval scan is empty above its minimum width");
    }
    let per_rung: Vec<(f64, (f64, f64))> =
        rungs.par_iter().map(|r| r.best_ratio(eta, alpha)).collect();

    let mut running_max = Vec::with_capacity(per_rung.len());
    let mut best = (f64::NEG_INFINITY, per_rung[0].1);
    for &(ratio, iv) in &per_rung {
        if ratio > best.0 {
            best = (ratio, iv);
        }
        running_max.push(best.0);
    }
    let n = running_max.len();
    let divergent = n >= 3 && running_max[n - 1] > DIVERGENCE_FACTOR * running_max[n - 3];
    Ok(UahEstimate {
        constant: best.0,
        witness: best.1,
        divergent,
        rung_widths: rungs.iter().map(|r| r.width).collect(),
        running_max,
    })
}

/// Intervals of the scan on which `η(I) > k·|I|^α`, worst first.
pub fn violations(eta: &Measure, alpha: f64, k: f64, scan: &IntervalScan) -> Vec<(f64, f64, f64)> {
    let mut out: Vec<(f64, f64, f64)> = scan
        .rungs()
        .par_iter()
        .flat_map_iter(|r| {
            let mut found = Vec::new();
            r.for_each(|a, b| {
                let ratio = eta.mass_in(a, b) / (b - a).powf(alpha);
                if ratio > k * (1.0 + 1e-12) {
                    found.push((a, b, ratio));
                }
            });
            found
        })
        .collect();
    out.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.total_cmp(&y.0)));
    out
}
