//! Local scaling exponents, Rogers–Taylor style classification and
//! splitting, and the exponent algebra behind the continuity of `κ`.
//!
//! Limits such as `limsup M(x;ε)/ε^α` cannot be evaluated at finite
//! resolution. Everything here fits trends over geometric ladders of scales
//! and reports them together with the ladder and fit quality, so results are
//! diagnostics rather than certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::KappaProbe;
use crate::error::{argument, Error, Result};
use crate::ladder::Ladder;
use crate::measure::scan::violations;
use crate::measure::{Atom, DensityPiece, IntervalScan, Measure};
use crate::numeric::least_squares;
use crate::operator::RankOneFamily;
use crate::transform::{poisson_transform, UpperHalfPlanePoint};

/// Anything with a local mass `M(x;ε)` and a Poisson transform.
pub trait LocalProbe: Sync {
    fn local_mass(&self, x: f64, eps: f64) -> Result<f64>;
    fn local_poisson(&self, x: f64, eps: f64) -> Result<f64>;
    /// Smallest scale resolved near `x`.
    fn floor_at(&self, x: f64) -> Option<f64>;
}

impl LocalProbe for Measure {
    fn local_mass(&self, x: f64, eps: f64) -> Result<f64> {
        self.growth_function(x, eps)
    }

    fn local_poisson(&self, x: f64, eps: f64) -> Result<f64> {
        poisson_transform(self, UpperHalfPlanePoint::new(x, eps)?)
    }

    fn floor_at(&self, _x: f64) -> Option<f64> {
        self.resolution_floor()
    }
}

impl LocalProbe for KappaProbe {
    fn local_mass(&self, x: f64, eps: f64) -> Result<f64> {
        Ok(self.kappa_set(&[(x - eps, x + eps)])?.value)
    }

    fn local_poisson(&self, x: f64, eps: f64) -> Result<f64> {
        Ok(self.kappa_poisson(UpperHalfPlanePoint::new(x, eps)?)?.value)
    }

    /// `ν` resolved to `Δλ` resolves `κ` near `x` to `Δλ·F_μ(x)²/F'_μ(x)`,
    /// since `λ*(x) = -1/F_μ(x)`.
    fn floor_at(&self, x: f64) -> Option<f64> {
        let floor = self.nu().resolution_floor()?;
        Some(floor * coupling_to_energy_scale(self.family(), x))
    }
}

/// `dx/dλ*` along the crossing curve `λ*(x) = -1/F_μ(x)`.
fn coupling_to_energy_scale(family: &RankOneFamily, x: f64) -> f64 {
    if let Some(p) = family.poles().iter().find(|p| p.position == x) {
        return p.weight;
    }
    let f = family.real_borel(x);
    let df = family.real_borel_derivative(x);
    let s = f * f / df;
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// `M/ε^α → 0`.
    Zero,
    FinitePositive,
    /// `M/ε^α → ∞`.
    Infinite,
    Indeterminate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Zero => "zero",
            Classification::FinitePositive => "finite-positive",
            Classification::Infinite => "infinite",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

/// Thresholds for reading a trend off a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendConfig {
    /// Cumulative change of `M/ε^α` that counts as growth or decay.
    #[serde(default = "default_factor")]
    pub factor: f64,
    /// Fit only the last `window` usable rungs; all of them when absent.
    #[serde(default)]
    pub window: Option<usize>,
    /// Fits with `r²` below this and no threshold met are indeterminate.
    #[serde(default = "default_min_r2")]
    pub min_r_squared: f64,
}

fn default_factor() -> f64 {
    2.0
}

fn default_min_r2() -> f64 {
    0.5
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            factor: default_factor(),
            window: None,
            min_r_squared: default_min_r2(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Growth,
    Poisson,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Growth => "growth",
            Route::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    pub route: Route,
    pub x: f64,
    /// Local exponent `α̂`; `+∞` when the measure vanishes at the finest rungs.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ladder: Ladder,
    pub reference_alpha: f64,
    pub classification: Classification,
    pub rungs_used: usize,
    /// Rungs excluded from the fit (zero mass, or all rungs when η vanishes near x).
    pub rungs_dropped: usize,
    /// `ε_first/ε_last` over the fitted rungs.
    pub span: f64,
    /// Spread `max - min` of the fit residuals, in log units.
    pub residual_band: f64,
}

impl ScalingEstimate {
    /// Classification of the same fit against another reference exponent.
    pub fn classify_at(&self, alpha: f64, trend: &TrendConfig) -> Classification {
        if self.rungs_used == 0 {
            return Classification::Zero;
        }
        classify(self.exponent, alpha, self.r_squared, self.residual_band, self.span, trend)
    }
}

fn usable_scales(probe: &dyn LocalProbe, x: f64, ladder: &Ladder) -> Result<Vec<f64>> {
    ladder.validate()?;
    let scales = ladder.with_floor(probe.floor_at(x)).scales();
    if scales.len() < 3 {
        return Err(Error::InsufficientResolution(format!(
            "only {} ladder rungs above the resolution floor at x = {x}",
            scales.len()
        )));
    }
    Ok(scales)
}

/// Classify `ε^{α̂-α}` from the fitted exponent over the fitted span. A
/// poor fit is indeterminate only when its scatter, `band` in log units,
/// is itself as large as the trend factor; a flat, slightly noisy series
/// is finite.
fn classify(exponent: f64, alpha: f64, r2: f64, band: f64, span: f64, trend: &TrendConfig) -> Classification {
    if exponent == f64::INFINITY {
        return Classification::Zero;
    }
    let cumulative = span.powf((exponent - alpha).abs());
    if cumulative >= trend.factor {
        if exponent < alpha {
            Classification::Infinite
        } else {
            Classification::Zero
        }
    } else if r2 < trend.min_r_squared && band >= trend.factor.ln() {
        Classification::Indeterminate
    } else {
        Classification::FinitePositive
    }
}

fn fit(
    route: Route,
    x: f64,
    alpha: f64,
    ladder: &Ladder,
    scales: &[f64],
    values: &[f64],
    trend: &TrendConfig,
) -> Result<ScalingEstimate> {
    let mut pairs: Vec<(f64, f64)> = scales
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    let dropped = scales.len() - pairs.len();
    // M is monotone in ε, so zero rungs sit at the fine end: η vanishes near x
    if dropped > 0 && values.last() == Some(&0.0) {
        return Ok(ScalingEstimate {
            route,
            x,
            exponent: f64::INFINITY,
            intercept: f64::NAN,
            r_squared: 1.0,
            ladder: *ladder,
            reference_alpha: alpha,
            classification: Classification::Zero,
            rungs_used: 0,
            rungs_dropped: scales.len(),
            span: 1.0,
            residual_band: 0.0,
        });
    }
    if let Some(w) = trend.window {
        let start = pairs.len().saturating_sub(w.max(3));
        pairs.drain(..start);
    }
    if pairs.len() < 3 {
        return Err(Error::InsufficientResolution(format!(
            "only {} rungs with positive mass at x = {x}",
            pairs.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let line = least_squares(&xs, &ys)
        .ok_or_else(|| Error::Numerical("degenerate scale ladder".into()))?;
    let exponent = match route {
        Route::Growth => line.slope,
        Route::Poisson => 1.0 + line.slope,
    };
    let span = (xs[0] - xs[xs.len() - 1]).exp();
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - line.intercept - line.slope * x);
    let (lo, hi) = residuals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let residual_band = hi - lo;
    Ok(ScalingEstimate {
        route,
        x,
        exponent,
        intercept: line.intercept,
        r_squared: line.r_squared,
        ladder: *ladder,
        reference_alpha: alpha,
        classification: classify(exponent, alpha, line.r_squared, residual_band, span, trend),
        rungs_used: pairs.len(),
        rungs_dropped: dropped,
        span,
        residual_band,
    })
}

/// Slope of `log M(x;ε)` against `log ε`, classified against `α`.
pub fn scaling_exponent_growth(
    probe: &dyn LocalProbe,
    x: f64,
    alpha: f64,
    ladder: &Ladder,
    trend: &TrendConfig,
) -> Result<ScalingEstimate> {
    let scales = usable_scales(probe, x, ladder)?;
    let values = scales
        .par_iter()
        .map(|&e| probe.local_mass(x, e))
        .collect::<Result<Vec<_>>>()?;
    fit(Route::Growth, x, alpha, ladder, &scales, &values, trend)
}

/// Exponent `1 + slope` of `log P(x+iε)` against `log ε`, so that
/// `ε^{1-α}P ~ ε^{α̂-α}`. Values above 1 mean the measure vanishes near `x`.
pub fn scaling_exponent_poisson(
    probe: &dyn LocalProbe,
    x: f64,
    alpha: f64,
    ladder: &Ladder,
    trend: &TrendConfig,
) -> Result<ScalingEstimate> {
    let scales = usable_scales(probe, x, ladder)?;
    let values = scales
        .par_iter()
        .map(|&e| probe.local_poisson(x, e))
        .collect::<Result<Vec<_>>>()?;
    fit(Route::Poisson, x, alpha, ladder, &scales, &values, trend)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    /// `D̄^α < ∞`: the α-continuous part lives here.
    TZeroPlus,
    /// `D̄^α = ∞`.
    TInfinite,
    Indeterminate,
}

pub fn classify_point(
    probe: &dyn LocalProbe,
    x: f64,
    alpha: f64,
    ladder: &Ladder,
    trend: &TrendConfig,
) -> Result<(PointClass, ScalingEstimate)> {
    let est = scaling_exponent_growth(probe, x, alpha, ladder, trend)?;
    let class = match est.classification {
        Classification::Zero | Classification::FinitePositive => PointClass::TZeroPlus,
        Classification::Infinite => PointClass::TInfinite,
        Classification::Indeterminate => PointClass::Indeterminate,
    };
    Ok((class, est))
}

#[derive(Debug, Clone)]
pub struct RogersTaylorSplit {
    /// Part certified `η₁(I) ≤ K|I|^α` on the scan.
    pub eta1: Measure,
    /// Removed mass.
    pub eta2: Measure,
    pub eta2_mass: f64,
    pub certified: bool,
    /// Worst remaining ratio `η₁(I)/|I|^α` when not certified.
    pub frontier: Option<f64>,
    pub moved_atoms: Vec<Atom>,
    pub moved_pieces: usize,
}

/// Move whole atoms and density pieces from `η` into `η₂`, worst violation
/// first, until `η₁ = η - η₂` passes the scan at constant `k_target`.
pub fn rogers_taylor_split(
    eta: &Measure,
    alpha: f64,
    k_target: f64,
    scan: &IntervalScan,
) -> Result<RogersTaylorSplit> {
    if !eta.is_finite() || !matches!(eta.tag(), crate::measure::FamilyTag::Generic
        | crate::measure::FamilyTag::Uniform { .. }
        | crate::measure::FamilyTag::CantorApprox { .. })
    {
        return argument("Rogers–Taylor split needs a finite atomic or piecewise measure");
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(k_target > 0.0) {
        return argument(format!("need α ∈ (0,1] and K > 0, got α = {alpha}, K = {k_target}"));
    }
    let total = eta.total_mass();
    let mut keep_atoms: Vec<Atom> = eta.atoms().to_vec();
    let mut keep_pieces: Vec<DensityPiece> = eta.pieces().to_vec();
    let mut moved_atoms: Vec<Atom> = Vec::new();
    let mut moved_pieces: Vec<DensityPiece> = Vec::new();
    let rebuild = |atoms: &[Atom], pieces: &[DensityPiece]| -> Result<Measure> {
        let m = Measure::generic(atoms.to_vec(), pieces.to_vec())?;
        Ok(match eta.resolution_floor() {
            Some(f) => m.with_resolution_floor(f),
            None => m,
        })
    };
    let moved_mass = |atoms: &[Atom], pieces: &[DensityPiece]| {
        crate::numeric::compensated_sum(atoms.iter().map(|a| a.weight).chain(pieces.iter().map(|p| p.mass)))
    };

    loop {
        let eta1 = rebuild(&keep_atoms, &keep_pieces)?;
        let worst = violations(&eta1, alpha, k_target, scan);
        let Some(&(a, b, ratio)) = worst.first() else {
            let eta2 = rebuild(&moved_atoms, &moved_pieces)?;
            return Ok(RogersTaylorSplit {
                eta1,
                eta2_mass: moved_mass(&moved_atoms, &moved_pieces),
                eta2,
                certified: true,
                frontier: None,
                moved_atoms,
                moved_pieces: moved_pieces.len(),
            });
        };
        let atom = keep_atoms
            .iter()
            .enumerate()
            .filter(|(_, x)| x.position > a && x.position < b && x.weight > 0.0)
            .max_by(|x, y| x.1.weight.total_cmp(&y.1.weight))
            .map(|(i, _)| i);
        let next_mass = if let Some(i) = atom {
            let removed = keep_atoms.remove(i);
            moved_atoms.push(removed);
            moved_mass(&moved_atoms, &moved_pieces)
        } else {
            let piece = keep_pieces
                .iter()
                .enumerate()
                .filter(|(_, p)| p.start < b && p.end > a && p.mass > 0.0)
                .max_by(|x, y| {
                    let mx = x.1.mass * ((b.min(x.1.end) - a.max(x.1.start)) / x.1.len());
                    let my = y.1.mass * ((b.min(y.1.end) - a.max(y.1.start)) / y.1.len());
                    mx.total_cmp(&my)
                })
                .map(|(i, _)| i);
            let Some(i) = piece else {
                return Err(Error::Numerical(format!(
                    "violation on ({a}, {b}) with nothing left to move"
                )));
            };
            let removed = keep_pieces.remove(i);
            moved_pieces.push(removed);
            moved_mass(&moved_atoms, &moved_pieces)
        };
        if next_mass > 0.99 * total {
            let eta1 = rebuild(&keep_atoms, &keep_pieces)?;
            let eta2 = rebuild(&moved_atoms, &moved_pieces)?;
            return Ok(RogersTaylorSplit {
                eta1,
                eta2,
                eta2_mass: next_mass,
                certified: false,
                frontier: Some(ratio),
                moved_atoms,
                moved_pieces: moved_pieces.len(),
            });
        }
    }
}

/// `γ(α, β) = α - 2(1-β)(1-α)` and the validity threshold on `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `max{0, (2-3α)/(2(1-α))}`.
    pub threshold: f64,
    pub valid: bool,
}

pub fn beta_threshold(alpha: f64) -> f64 {
    ((2.0 - 3.0 * alpha) / (2.0 * (1.0 - alpha))).max(0.0)
}

pub fn gamma_exponent(alpha: f64, beta: f64) -> Result<ExponentPair> {
    if !(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0) {
        return argument(format!("α and β must lie in (0,1), got α = {alpha}, β = {beta}"));
    }
    let threshold = beta_threshold(alpha);
    Ok(ExponentPair {
        alpha,
        beta,
        gamma: alpha - 2.0 * (1.0 - beta) * (1.0 - alpha),
        threshold,
        valid: beta > threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaForDelta {
    pub beta: f64,
    /// `β` lies in `(0,1)` and clears the threshold of [`beta_threshold`].
    pub valid: bool,
}

/// The `β` with `γ(α, β) = δ`: `β = 1 - (α-δ)/(2(1-α))`.
pub fn beta_for_delta(alpha: f64, delta: f64) -> Result<BetaForDelta> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return argument(format!("α must lie in (0,1), got {alpha}"));
    }
    if !(delta > 0.0 && delta < alpha) {
        return argument(format!("need 0 < δ < α, got δ = {delta}, α = {alpha}"));
    }
    let beta = 1.0 - (alpha - delta) / (2.0 * (1.0 - alpha));
    Ok(BetaForDelta {
        beta,
        valid: beta > 0.0 && beta < 1.0 && beta > beta_threshold(alpha),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcDensity {
    pub density: f64,
    /// `P` grew by at least the trend factor over the last three rungs.
    pub divergent: bool,
    pub rungs: usize,
}

/// `(1/π)P_η(x+i0)` by two-level Richardson extrapolation over the last
/// three rungs, assuming `P(x+iε)/π = d + c₁ε + c₂ε² + …`.
pub fn ac_density_estimate(eta: &Measure, x: f64, ladder: &Ladder, trend: &TrendConfig) -> Result<AcDensity> {
    let scales = usable_scales(eta, x, ladder)?;
    let n = scales.len();
    let v = scales[n - 3..]
        .iter()
        .map(|&e| Ok(eta.local_poisson(x, e)? / std::f64::consts::PI))
        .collect::<Result<Vec<f64>>>()?;
    let divergent = v[2] >= trend.factor * v[0];
    let r = ladder.ratio;
    let first = |coarse: f64, fine: f64| (fine - r * coarse) / (1.0 - r);
    let r1 = first(v[0], v[1]);
    let r2 = first(v[1], v[2]);
    let density = (r2 - r * r * r1) / (1.0 - r * r);
    Ok(AcDensity {
        density: density.max(0.0),
        divergent,
        rungs: n,
    })
}

/// One row of the main-theorem diagnostic table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub point: f64,
    pub route: Route,
    pub alpha_hat: f64,
    pub r2: f64,
    pub classification: Classification,
    pub delta_target: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violation,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violation => "violation",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub point: f64,
    /// More than one unit beyond the spectrum of `A` with respect to `φ`.
    pub outside_support: bool,
    pub growth: ScalingEstimate,
    pub poisson: ScalingEstimate,
    /// Poisson-route exponent of `μ` at the point.
    pub mu_beta: f64,
    /// `γ(α, β̂)` when `β̂ ∈ (0,1)`.
    pub gamma_prediction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremConfig {
    pub alpha: f64,
    pub delta_targets: Vec<f64>,
    /// Exponent slack for points outside the support.
    #[serde(default = "default_outside_tolerance")]
    pub outside_tolerance: f64,
    pub ladder: Ladder,
    #[serde(default)]
    pub trend: TrendConfig,
}

fn default_outside_tolerance() -> f64 {
    0.1
}

/// Diagnostic table, not a proof: the contract is that no sampled point
/// is classified against the expected continuity at the stated ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub label: String,
    pub alpha: f64,
    pub points: Vec<PointDiagnostics>,
    pub rows: Vec<ReportRow>,
    pub violations: usize,
    pub indeterminate: usize,
}

impl MainTheoremReport {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        w.write_record(["point", "route", "alpha_hat", "r2", "classification", "delta_target", "verdict"])
            .map_err(ser)?;
        for r in &self.rows {
            w.write_record([
                format!("{:e}", r.point),
                r.route.as_str().to_string(),
                format!("{:e}", r.alpha_hat),
                format!("{:e}", r.r2),
                r.classification.as_str().to_string(),
                format!("{}", r.delta_target),
                r.verdict.as_str().to_string(),
            ])
            .map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Default sample points: eigenvalues of `A`, eigenvalues of `A_λ` at
/// `λ ∈ {1/4, 3/4}`, midpoints between eigenvalues, and one point on each
/// side at distance 1.5 beyond the spectrum.
pub fn default_sample_points(family: &RankOneFamily) -> Result<Vec<f64>> {
    let poles: Vec<f64> = family.poles().iter().map(|p| p.position).collect();
    let mut pts = poles.clone();
    for lambda in [0.25, 0.75] {
        pts.extend(family.perturbed_measure_secular(lambda)?.atoms().iter().map(|a| a.position));
    }
    pts.extend(poles.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    if let (Some(lo), Some(hi)) = (poles.first(), poles.last()) {
        pts.push(lo - 1.5);
        pts.push(hi + 1.5);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// Scaling diagnostics of `κ` at the sample points.
///
/// Inside the spectral hull a point violates a target `δ < α` when either
/// route classifies it as Infinite at `δ`. Outside it, the exponent must
/// stay above `α - outside_tolerance`.
pub fn main_theorem_report(probe: &KappaProbe, points: &[f64], cfg: &MainTheoremConfig) -> Result<MainTheoremReport> {
    let alpha = cfg.alpha;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return argument(format!("α must lie in (0,1], got {alpha}"));
    }
    if cfg.delta_targets.iter().any(|d| !(*d > 0.0 && *d < alpha)) {
        return argument("every δ target must lie in (0, α)");
    }
    if points.is_empty() {
        return argument("main-theorem report needs sample points");
    }
    if let Some(floor) = probe.nu().resolution_floor() {
        let span = cfg.ladder.eps_max / floor;
        for d in &cfg.delta_targets {
            if span.powf(alpha - d) < cfg.trend.factor {
                return Err(Error::InsufficientResolution(format!(
                    "ν resolved to {floor:e} cannot separate δ = {d} from α = {alpha}"
                )));
            }
        }
    }
    let family = probe.family();
    let (lo, hi) = match (family.poles().first(), family.poles().last()) {
        (Some(a), Some(b)) => (a.position, b.position),
        _ => return argument("family has no spectral atoms"),
    };
    let mu = family.base_measure().to_measure();

    let points_out = points
        .par_iter()
        .map(|&x| {
            let growth = scaling_exponent_growth(probe, x, alpha, &cfg.ladder, &cfg.trend)?;
            let poisson = scaling_exponent_poisson(probe, x, alpha, &cfg.ladder, &cfg.trend)?;
            let mu_est = scaling_exponent_poisson(&mu, x, alpha, &cfg.ladder, &cfg.trend)?;
            let mu_beta = mu_est.exponent;
            let gamma_prediction = if mu_beta > 0.0 && mu_beta < 1.0 && alpha < 1.0 {
                Some(gamma_exponent(alpha, mu_beta)?.gamma)
            } else {
                None
            };
            Ok(PointDiagnostics {
                point: x,
                outside_support: x > hi + 1.0 || x < lo - 1.0,
                growth,
                poisson,
                mu_beta,
                gamma_prediction,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for p in &points_out {
        for est in [&p.growth, &p.poisson] {
            for &delta in &cfg.delta_targets {
                let class = est.classify_at(delta, &cfg.trend);
                let verdict = if p.outside_support {
                    if est.exponent >= alpha - cfg.outside_tolerance {
                        Verdict::Consistent
                    } else {
                        Verdict::Violation
                    }
                } else {
                    match class {
                        Classification::Infinite => Verdict::Violation,
                        Classification::Indeterminate => Verdict::Indeterminate,
                        _ => Verdict::Consistent,
                    }
                };
                rows.push(ReportRow {
                    point: p.point,
                    route: est.route,
                    alpha_hat: est.exponent,
                    r2: est.r_squared,
                    classification: class,
                    delta_target: delta,
                    verdict,
                });
            }
        }
    }
    let violations = rows.iter().filter(|r| r.verdict == Verdict::Violation).count();
    let indeterminate = rows.iter().filter(|r| r.verdict == Verdict::Indeterminate).count();
    Ok(MainTheoremReport {
        label: "diagnostic: finite-ladder consistency of scaling exponents, not a limsup certificate".into(),
        alpha,
        points: points_out,
        rows,
        violations,
        indeterminate,
    })
}
